#pragma once

// Independent reference implementations used to cross-check the library.
// Everything here is deliberately written as plain explicit loops, separate
// from the code paths under test.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wsod/loss_kernels.hpp"
#include "wsod/pgt_miner.hpp"
#include "wsod/voc_io.hpp"

namespace testsupport {

inline double ref_iou(const wsod::BBox& a, const wsod::BBox& b) {
  const double ix0 = a.xmin > b.xmin ? a.xmin : b.xmin;
  const double iy0 = a.ymin > b.ymin ? a.ymin : b.ymin;
  const double ix1 = a.xmax < b.xmax ? a.xmax : b.xmax;
  const double iy1 = a.ymax < b.ymax ? a.ymax : b.ymax;
  if (ix1 - ix0 <= 0.0 || iy1 - iy0 <= 0.0) return 0.0;
  const double inter = (ix1 - ix0) * (iy1 - iy0);
  const double area_a = (a.xmax - a.xmin) * (a.ymax - a.ymin);
  const double area_b = (b.xmax - b.xmin) * (b.ymax - b.ymin);
  return inter / (area_a + area_b - inter);
}

struct RefEval {
  std::map<std::string, double> ap;
  double map = 0.0;
};

/// Greedy matching and 11-level interpolation, both spelled out directly.
inline RefEval brute_force_evaluate(const std::vector<wsod::Detection>& dets,
                                    const std::vector<wsod::ImageAnnotation>& gts,
                                    double threshold) {
  std::set<std::string> classes;
  for (const wsod::ImageAnnotation& a : gts) {
    for (const wsod::LabeledBox& o : a.objects) classes.insert(o.class_name);
  }

  RefEval result;
  double ap_sum = 0.0;
  for (const std::string& cls : classes) {
    // Ground truth of this class per image, plus used-flags.
    std::map<std::string, std::vector<wsod::BBox>> gt_boxes;
    std::map<std::string, std::vector<bool>> used;
    int total_gt = 0;
    for (const wsod::ImageAnnotation& a : gts) {
      for (const wsod::LabeledBox& o : a.objects) {
        if (o.class_name == cls) {
          gt_boxes[a.image_id].push_back(o.bbox);
          ++total_gt;
        }
      }
    }
    for (const auto& [id, boxes] : gt_boxes) {
      used[id] = std::vector<bool>(boxes.size(), false);
    }

    // Detections of this class, picked by repeated scan for the highest
    // score (earliest input position on ties).
    std::vector<size_t> pool;
    for (size_t i = 0; i < dets.size(); ++i) {
      if (dets[i].class_name == cls) pool.push_back(i);
    }
    std::vector<bool> picked(pool.size(), false);
    std::vector<double> recalls;
    std::vector<double> precisions;
    int tp = 0;
    int fp = 0;
    for (size_t round = 0; round < pool.size(); ++round) {
      int best = -1;
      for (size_t i = 0; i < pool.size(); ++i) {
        if (picked[i]) continue;
        if (best < 0 || dets[pool[i]].score > dets[pool[best]].score) {
          best = static_cast<int>(i);
        }
      }
      picked[best] = true;
      const wsod::Detection& det = dets[pool[best]];

      bool is_tp = false;
      auto it = gt_boxes.find(det.image_id);
      if (it != gt_boxes.end()) {
        double best_overlap = 0.0;
        int best_gt = -1;
        for (size_t g = 0; g < it->second.size(); ++g) {
          const double v = ref_iou(det.bbox, it->second[g]);
          if (v > best_overlap) {
            best_overlap = v;
            best_gt = static_cast<int>(g);
          }
        }
        if (best_gt >= 0 && best_overlap >= threshold &&
            !used[det.image_id][best_gt]) {
          used[det.image_id][best_gt] = true;
          is_tp = true;
        }
      }
      is_tp ? ++tp : ++fp;
      recalls.push_back(total_gt > 0 ? static_cast<double>(tp) / total_gt
                                     : 0.0);
      precisions.push_back(static_cast<double>(tp) / (tp + fp));
    }

    double ap = 0.0;
    for (int level = 0; level <= 10; ++level) {
      const double r = level / 10.0;
      double best_prec = 0.0;
      for (size_t i = 0; i < recalls.size(); ++i) {
        if (recalls[i] >= r && precisions[i] > best_prec) {
          best_prec = precisions[i];
        }
      }
      ap += best_prec;
    }
    ap /= 11.0;
    result.ap[cls] = ap;
    ap_sum += ap;
  }
  result.map = classes.empty() ? 0.0 : ap_sum / classes.size();
  return result;
}

/// Naive filter-sort-take-k over the whole detection list.
inline std::vector<wsod::ScoredPgt> brute_force_mine(
    const std::vector<wsod::Detection>& dets,
    const std::vector<wsod::ImageLevelLabels>& labels,
    const std::map<std::string, wsod::ImageSize>& sizes, int k) {
  std::map<std::string, const wsod::ImageLevelLabels*> ordered;
  for (const wsod::ImageLevelLabels& l : labels) ordered[l.image_id] = &l;

  std::vector<wsod::ScoredPgt> out;
  for (const auto& [image_id, l] : ordered) {
    wsod::ScoredPgt pgt;
    pgt.image_id = image_id;
    pgt.width = sizes.at(image_id).width;
    pgt.height = sizes.at(image_id).height;
    for (const std::string& cls : l->classes) {
      std::vector<std::pair<size_t, wsod::Detection>> filtered;
      for (size_t i = 0; i < dets.size(); ++i) {
        if (dets[i].image_id == image_id && dets[i].class_name == cls) {
          filtered.emplace_back(i, dets[i]);
        }
      }
      // Selection sort: score descending, input position ascending.
      for (size_t a = 0; a < filtered.size(); ++a) {
        size_t best = a;
        for (size_t b = a + 1; b < filtered.size(); ++b) {
          if (filtered[b].second.score > filtered[best].second.score ||
              (filtered[b].second.score == filtered[best].second.score &&
               filtered[b].first < filtered[best].first)) {
            best = b;
          }
        }
        std::swap(filtered[a], filtered[best]);
      }
      for (size_t r = 0; r < filtered.size() && r < static_cast<size_t>(k);
           ++r) {
        pgt.entries.push_back({cls, filtered[r].second.bbox,
                               filtered[r].second.score});
      }
    }
    out.push_back(std::move(pgt));
  }
  return out;
}

/// Greedy max-degree center selection over an explicit adjacency matrix,
/// recomputing degrees from scratch every round.
inline std::vector<int> brute_greedy_centers(
    const std::vector<std::vector<bool>>& adjacent,
    const std::vector<double>& scores) {
  const int n = static_cast<int>(adjacent.size());
  std::vector<bool> alive(n, true);
  std::vector<int> centers;
  int remaining = n;
  while (remaining > 0) {
    int best = -1;
    int best_degree = -1;
    for (int v = 0; v < n; ++v) {
      if (!alive[v]) continue;
      int degree = 0;
      for (int u = 0; u < n; ++u) {
        if (u != v && alive[u] && adjacent[v][u]) ++degree;
      }
      if (best < 0 || degree > best_degree ||
          (degree == best_degree && scores[v] > scores[best])) {
        best = v;
        best_degree = degree;
      }
    }
    centers.push_back(best);
    std::vector<int> to_remove{best};
    for (int u = 0; u < n; ++u) {
      if (u != best && alive[u] && adjacent[best][u]) to_remove.push_back(u);
    }
    for (int r : to_remove) {
      alive[r] = false;
      --remaining;
    }
  }
  return centers;
}

inline double ref_smooth_l1(double x) {
  const double a = x < 0 ? -x : x;
  if (a < 1.0) return 0.5 * a * a;
  return a - 0.5;
}

inline double ref_frcnn(const std::vector<double>& p, int u,
                        const std::array<double, 4>& predicted,
                        const std::array<double, 4>& target, double lambda) {
  double loss = -std::log(p[u]);
  if (u >= 1) {
    for (int i = 0; i < 4; ++i) {
      loss += lambda * ref_smooth_l1(predicted[i] - target[i]);
    }
  }
  return loss;
}

inline double ref_rpn(const wsod::RpnBatch& batch) {
  double cls = 0.0;
  double reg = 0.0;
  for (const wsod::RpnAnchor& a : batch.anchors) {
    cls += -(a.label * std::log(a.p) + (1 - a.label) * std::log(1.0 - a.p));
    if (a.label == 1) {
      for (int i = 0; i < 4; ++i) {
        reg += ref_smooth_l1(a.predicted[i] - a.target[i]);
      }
    }
  }
  return cls / batch.n_cls + batch.lambda * reg / batch.n_reg;
}

inline double ref_bag(const wsod::BagLossInput& input) {
  double total = 0.0;
  for (const wsod::ProposalCluster& c : input.clusters) {
    double sum = 0.0;
    for (double s : c.member_scores) sum += s;
    const double m = static_cast<double>(c.member_scores.size());
    total += c.confidence * m * std::log(sum / m);
  }
  for (const wsod::BackgroundProposal& b : input.background) {
    total += b.weight * std::log(b.score);
  }
  return -total / input.proposal_count;
}

}  // namespace testsupport
