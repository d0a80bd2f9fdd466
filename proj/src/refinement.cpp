#include "wsod/refinement.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "wsod/csv.hpp"
#include "wsod/error.hpp"
#include "parallel.hpp"

namespace wsod {

namespace {

/// Indices of `entries` by descending stored score, ties by position.
std::vector<size_t> rank_entries(const std::vector<ScoredPgtEntry>& entries) {
  std::vector<size_t> order(entries.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return entries[a].score > entries[b].score;
  });
  return order;
}

std::vector<Detection> sorted_by_score(std::vector<Detection> dets) {
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& a, const Detection& b) {
                     return a.score > b.score;
                   });
  return dets;
}

}  // namespace

std::optional<std::string> policy_warning(const RefinementPolicy& policy) {
  if (policy.update != UpdateRule::kAll && policy.k < 2) {
    return "half-update rules replace floor(m/2) entries, so k=" +
           std::to_string(policy.k) + " makes every refinement a no-op";
  }
  return std::nullopt;
}

bool should_refine(int epoch, int max_epochs, TimingRule timing) {
  if (max_epochs < 1 || epoch < 1 || epoch > max_epochs) {
    throw ContractError("should_refine requires 1 <= epoch <= max_epochs");
  }
  switch (timing) {
    case TimingRule::kEveryEpoch:
      return true;
    case TimingRule::kEveryThird:
      if (max_epochs < 3) {
        throw ContractError("every-third timing requires max_epochs >= 3");
      }
      return epoch % 3 == 0;
    case TimingRule::kLastThree:
      if (max_epochs < 3) {
        throw ContractError("last-three timing requires max_epochs >= 3");
      }
      return epoch > max_epochs - 3;
    case TimingRule::kOnceAtTwoThirds:
      // round-half-up of 2*max_epochs/3 in integer arithmetic
      return epoch == (4 * max_epochs + 3) / 6;
  }
  throw ContractError("unknown timing rule");
}

std::vector<ScoredPgtEntry> refine_image_class(
    const std::vector<ScoredPgtEntry>& current,
    const std::vector<Detection>& fresh, UpdateRule update, int k) {
  if (k < 1) throw ContractError("refinement k must be >= 1");
  const size_t m = current.size();
  if (m > static_cast<size_t>(k)) {
    throw ContractError("refine_image_class: current entries exceed k");
  }
  const std::vector<Detection> ranked_fresh = sorted_by_score(fresh);

  std::vector<ScoredPgtEntry> result;
  if (update == UpdateRule::kAll) {
    const size_t take = std::min<size_t>(k, ranked_fresh.size());
    for (size_t i = 0; i < take; ++i) {
      const Detection& d = ranked_fresh[i];
      result.push_back({d.class_name, d.bbox, d.score});
    }
    return result;
  }

  const size_t quota = m / 2;
  const std::vector<size_t> ranked = rank_entries(current);

  // Replacement targets in priority order: BestHalf replaces from the top
  // score downward, WorstHalf from the bottom upward.
  std::vector<size_t> targets;
  std::vector<char> is_target(m, 0);
  if (update == UpdateRule::kBestHalf) {
    for (size_t r = 0; r < quota; ++r) targets.push_back(ranked[r]);
  } else {  // kWorstHalf
    for (size_t r = 0; r < quota; ++r) targets.push_back(ranked[m - 1 - r]);
  }
  for (size_t t : targets) is_target[t] = 1;

  std::vector<ScoredPgtEntry> kept;
  for (size_t i = 0; i < m; ++i) {
    if (!is_target[i]) kept.push_back(current[i]);
  }

  // Fresh replacements, skipping boxes already present among kept entries.
  std::vector<ScoredPgtEntry> replacements;
  for (const Detection& d : ranked_fresh) {
    if (replacements.size() >= quota) break;
    bool duplicate = false;
    for (const ScoredPgtEntry& e : kept) {
      if (e.class_name == d.class_name && e.bbox == d.bbox) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) replacements.push_back({d.class_name, d.bbox, d.score});
  }
  // Shortfall: targets without a fresh replacement stay in place.
  for (size_t i = replacements.size(); i < targets.size(); ++i) {
    kept.push_back(current[targets[i]]);
  }

  result = std::move(replacements);
  result.insert(result.end(), kept.begin(), kept.end());
  std::stable_sort(result.begin(), result.end(),
                   [](const ScoredPgtEntry& a, const ScoredPgtEntry& b) {
                     return a.score > b.score;
                   });
  return result;
}

std::vector<ScoredPgt> refine_dataset(const std::vector<ScoredPgt>& pgt,
                                      const std::vector<Detection>& fresh,
                                      const std::vector<ImageLevelLabels>& labels,
                                      const RefinementPolicy& policy,
                                      std::vector<MiningWarning>* warnings,
                                      int jobs) {
  std::vector<const ScoredPgt*> ordered;
  ordered.reserve(pgt.size());
  for (const ScoredPgt& p : pgt) ordered.push_back(&p);
  std::sort(ordered.begin(), ordered.end(),
            [](const ScoredPgt* a, const ScoredPgt* b) {
              return a->image_id < b->image_id;
            });

  std::map<std::string, const ImageLevelLabels*> label_index;
  for (const ImageLevelLabels& l : labels) {
    if (!label_index.emplace(l.image_id, &l).second) {
      throw DataError("duplicate labeled image id: " + l.image_id);
    }
  }
  std::map<std::string, std::vector<Detection>> fresh_by_image;
  for (const ScoredPgt* p : ordered) {
    if (!fresh_by_image.emplace(p->image_id, std::vector<Detection>{}).second) {
      throw DataError("duplicate pseudo-ground-truth image id: " + p->image_id);
    }
    if (!label_index.count(p->image_id)) {
      throw DataError("no image-level labels for image id: " + p->image_id);
    }
  }
  for (const Detection& d : fresh) {
    auto it = fresh_by_image.find(d.image_id);
    if (it == fresh_by_image.end()) {
      throw DataError("detection references unknown image id: " + d.image_id);
    }
    it->second.push_back(d);
  }

  const int n = static_cast<int>(ordered.size());
  std::vector<ScoredPgt> out(n);
  std::vector<std::vector<MiningWarning>> warn(n);
  parallel_for(n, jobs, [&](int i) {
    const ScoredPgt& image_pgt = *ordered[i];
    const ImageLevelLabels& image_labels = *label_index.at(image_pgt.image_id);
    const std::vector<Detection>& image_fresh =
        fresh_by_image.at(image_pgt.image_id);
    const ImageSize size{image_pgt.width, image_pgt.height};

    ScoredPgt refined;
    refined.image_id = image_pgt.image_id;
    refined.width = image_pgt.width;
    refined.height = image_pgt.height;
    for (const std::string& cls : image_labels.classes) {
      std::vector<ScoredPgtEntry> current;
      for (const ScoredPgtEntry& e : image_pgt.entries) {
        if (e.class_name == cls) current.push_back(e);
      }
      std::vector<Detection> cls_fresh;
      for (const Detection& d : image_fresh) {
        if (d.class_name == cls) cls_fresh.push_back(d);
      }
      std::vector<ScoredPgtEntry> updated =
          refine_image_class(current, cls_fresh, policy.update, policy.k);
      for (ScoredPgtEntry& e : updated) {
        const double w = size.width;
        const double h = size.height;
        double x0 = std::clamp(e.bbox.xmin, 0.0, w);
        double y0 = std::clamp(e.bbox.ymin, 0.0, h);
        double x1 = std::clamp(e.bbox.xmax, 0.0, w);
        double y1 = std::clamp(e.bbox.ymax, 0.0, h);
        if (x0 != e.bbox.xmin || y0 != e.bbox.ymin || x1 != e.bbox.xmax ||
            y1 != e.bbox.ymax) {
          if (!(x0 < x1) || !(y0 < y1)) {
            throw DataError("image " + refined.image_id + " class " + cls +
                            ": refined box lies outside the image");
          }
          if (warnings) {
            warn[i].push_back(
                {refined.image_id, cls, "refined box clamped to image bounds"});
          }
          e.bbox = BBox(x0, y0, x1, y1);
        }
        refined.entries.push_back(e);
      }
    }
    out[i] = std::move(refined);
  });
  if (warnings) {
    for (std::vector<MiningWarning>& w : warn) {
      warnings->insert(warnings->end(), w.begin(), w.end());
    }
  }
  return out;
}

RefinementRun run_refinement_loop(DetectorOracle& oracle,
                                  const std::vector<ImageAnnotation>& gt,
                                  const RefinementPolicy& policy,
                                  int max_epochs, double iou_threshold,
                                  int jobs) {
  if (max_epochs < 1) throw ContractError("max_epochs must be >= 1");

  std::vector<ImageLevelLabels> labels;
  std::map<std::string, ImageSize> sizes;
  for (const ImageAnnotation& a : gt) {
    labels.push_back(image_level_labels(a));
    sizes[a.image_id] = {a.width, a.height};
  }

  RefinementRun run;
  std::vector<Detection> initial = oracle.detect_all(gt, jobs);
  std::vector<ScoredPgt> pgt =
      mine_dataset(initial, labels, sizes, {policy.k}, nullptr, jobs);

  for (int epoch = 1; epoch <= max_epochs; ++epoch) {
    oracle.advance_epoch();
    const bool refined = should_refine(epoch, max_epochs, policy.timing);
    if (refined) {
      std::vector<Detection> fresh = oracle.detect_all(gt, jobs);
      pgt = refine_dataset(pgt, fresh, labels, policy, nullptr, jobs);
    }
    const EvalReport report =
        evaluate(pgt_as_detections(pgt), gt, iou_threshold, jobs);
    run.epochs.push_back({epoch, refined, report.map});
  }
  run.final_pgt = std::move(pgt);
  return run;
}

std::string epoch_csv(const std::vector<EpochRecord>& epochs) {
  std::string out = "epoch,refined,map\n";
  for (const EpochRecord& e : epochs) {
    out += std::to_string(e.epoch) + "," + (e.refined ? "1" : "0") + "," +
           fmt_fixed(e.map, 6) + "\n";
  }
  return out;
}

}  // namespace wsod
