#include "wsod/pgt_miner.hpp"

#include <algorithm>
#include <numeric>

#include "wsod/error.hpp"
#include "parallel.hpp"

namespace wsod {

namespace {

void check_config(const MiningConfig& cfg) {
  if (cfg.k < 1) {
    throw ContractError("mining k must be >= 1, got " + std::to_string(cfg.k));
  }
}

/// Clamps a detection box to the image; degenerate results are data errors.
BBox clamp_to_image(const BBox& box, ImageSize size,
                    const std::string& image_id, const std::string& cls,
                    std::vector<MiningWarning>* warnings) {
  const double w = size.width;
  const double h = size.height;
  double x0 = std::clamp(box.xmin, 0.0, w);
  double y0 = std::clamp(box.ymin, 0.0, h);
  double x1 = std::clamp(box.xmax, 0.0, w);
  double y1 = std::clamp(box.ymax, 0.0, h);
  if (x0 != box.xmin || y0 != box.ymin || x1 != box.xmax || y1 != box.ymax) {
    if (!(x0 < x1) || !(y0 < y1)) {
      throw DataError("image " + image_id + " class " + cls +
                      ": detection box lies outside the image");
    }
    if (warnings) {
      warnings->push_back(
          {image_id, cls, "detection box clamped to image bounds"});
    }
  }
  return BBox(x0, y0, x1, y1);
}

}  // namespace

ImageAnnotation to_annotation(const ScoredPgt& pgt) {
  ImageAnnotation a;
  a.image_id = pgt.image_id;
  a.width = pgt.width;
  a.height = pgt.height;
  a.objects.reserve(pgt.entries.size());
  for (const ScoredPgtEntry& e : pgt.entries) {
    a.objects.push_back({e.class_name, e.bbox});
  }
  return a;
}

std::vector<Detection> pgt_as_detections(const std::vector<ScoredPgt>& pgt) {
  std::vector<Detection> out;
  for (const ScoredPgt& p : pgt) {
    for (const ScoredPgtEntry& e : p.entries) {
      out.push_back({p.image_id, e.class_name, e.score, e.bbox});
    }
  }
  return out;
}

ScoredPgt mine_image(const std::vector<Detection>& dets,
                     const ImageLevelLabels& labels, const MiningConfig& cfg,
                     ImageSize size, std::vector<MiningWarning>* warnings) {
  check_config(cfg);
  if (size.width < 1 || size.height < 1) {
    throw ContractError("image " + labels.image_id +
                        ": image size must be positive");
  }
  for (const Detection& d : dets) {
    if (d.image_id != labels.image_id) {
      throw ContractError("mine_image: detection image id " + d.image_id +
                          " does not match labels image id " +
                          labels.image_id);
    }
  }

  ScoredPgt out;
  out.image_id = labels.image_id;
  out.width = size.width;
  out.height = size.height;

  // std::set iteration gives the required ascending class order.
  for (const std::string& cls : labels.classes) {
    std::vector<size_t> candidates;
    for (size_t i = 0; i < dets.size(); ++i) {
      if (dets[i].class_name == cls) candidates.push_back(i);
    }
    if (candidates.empty()) {
      if (warnings) {
        warnings->push_back(
            {labels.image_id, cls, "labeled class has no detections"});
      }
      continue;
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](size_t a, size_t b) {
                       return dets[a].score > dets[b].score;
                     });
    const size_t take = std::min<size_t>(cfg.k, candidates.size());
    for (size_t r = 0; r < take; ++r) {
      const Detection& d = dets[candidates[r]];
      out.entries.push_back({cls,
                             clamp_to_image(d.bbox, size, labels.image_id, cls,
                                            warnings),
                             d.score});
    }
  }
  return out;
}

std::vector<ScoredPgt> mine_dataset(
    const std::vector<Detection>& dets,
    const std::vector<ImageLevelLabels>& labels,
    const std::map<std::string, ImageSize>& sizes, const MiningConfig& cfg,
    std::vector<MiningWarning>* warnings, int jobs) {
  check_config(cfg);

  std::vector<ImageLevelLabels> ordered = labels;
  std::sort(ordered.begin(), ordered.end(),
            [](const ImageLevelLabels& a, const ImageLevelLabels& b) {
              return a.image_id < b.image_id;
            });
  std::map<std::string, std::vector<Detection>> by_image;
  for (const ImageLevelLabels& l : ordered) {
    if (!by_image.emplace(l.image_id, std::vector<Detection>{}).second) {
      throw DataError("duplicate labeled image id: " + l.image_id);
    }
    if (!sizes.count(l.image_id)) {
      throw DataError("no image size known for image id: " + l.image_id);
    }
  }
  for (const Detection& d : dets) {
    auto it = by_image.find(d.image_id);
    if (it == by_image.end()) {
      throw DataError("detection references unknown image id: " + d.image_id);
    }
    it->second.push_back(d);
  }

  const int n = static_cast<int>(ordered.size());
  std::vector<ScoredPgt> out(n);
  std::vector<std::vector<MiningWarning>> warn(n);
  parallel_for(n, jobs, [&](int i) {
    const ImageLevelLabels& l = ordered[i];
    out[i] = mine_image(by_image[l.image_id], l, cfg, sizes.at(l.image_id),
                        warnings ? &warn[i] : nullptr);
  });
  if (warnings) {
    for (std::vector<MiningWarning>& w : warn) {
      warnings->insert(warnings->end(), w.begin(), w.end());
    }
  }
  return out;
}

}  // namespace wsod
