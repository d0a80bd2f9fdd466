#include "wsod/evaluation.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "wsod/csv.hpp"
#include "wsod/error.hpp"
#include "parallel.hpp"

namespace wsod {

namespace {

void check_threshold(double iou_threshold) {
  if (!(iou_threshold > 0.0) || !(iou_threshold < 1.0)) {
    throw ContractError("iou_threshold must lie in (0,1), got " +
                        std::to_string(iou_threshold));
  }
}

/// Indices of `dets` in descending score order, ties by input order.
std::vector<size_t> rank_by_score(const std::vector<Detection>& dets) {
  std::vector<size_t> order(dets.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return dets[a].score > dets[b].score;
  });
  return order;
}

/// Best ground-truth index by IoU (lowest index on ties), or -1.
int best_gt(const BBox& box, const std::vector<BBox>& gts, double* best_iou) {
  int best = -1;
  *best_iou = 0.0;
  for (size_t g = 0; g < gts.size(); ++g) {
    double v = iou(box, gts[g]);
    if (v > *best_iou) {
      *best_iou = v;
      best = static_cast<int>(g);
    }
  }
  return best;
}

}  // namespace

int MatchResult::tp() const {
  return static_cast<int>(std::count(is_tp.begin(), is_tp.end(), 1));
}

MatchResult match_class_in_image(const std::vector<Detection>& dets,
                                 const std::vector<BBox>& gts,
                                 double iou_threshold) {
  check_threshold(iou_threshold);
  for (const Detection& d : dets) {
    if (d.image_id != dets.front().image_id ||
        d.class_name != dets.front().class_name) {
      throw ContractError(
          "match_class_in_image requires detections of one class in one "
          "image");
    }
  }

  MatchResult result;
  result.iou_threshold = iou_threshold;
  result.is_tp.assign(dets.size(), 0);
  std::vector<char> taken(gts.size(), 0);
  for (size_t idx : rank_by_score(dets)) {
    double overlap = 0.0;
    int g = best_gt(dets[idx].bbox, gts, &overlap);
    if (g >= 0 && overlap >= iou_threshold && !taken[g]) {
      taken[g] = 1;
      result.is_tp[idx] = 1;
    }
  }
  result.fn = static_cast<int>(gts.size()) - result.tp();
  return result;
}

std::pair<double, double> precision_recall(const MatchResult& m) {
  const int tp = m.tp();
  const int fp = m.fp();
  const double precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp)
                                         : 0.0;
  const double recall = (tp + m.fn) > 0 ? static_cast<double>(tp) / (tp + m.fn)
                                        : 0.0;
  return {precision, recall};
}

PRCurve pr_curve(const std::vector<Detection>& dets,
                 const std::map<std::string, std::vector<BBox>>& gts_by_image,
                 double iou_threshold) {
  check_threshold(iou_threshold);
  PRCurve curve;
  for (const auto& [id, boxes] : gts_by_image) {
    curve.total_positives += static_cast<int>(boxes.size());
  }

  std::map<std::string, std::vector<char>> taken;
  for (const auto& [id, boxes] : gts_by_image) {
    taken[id].assign(boxes.size(), 0);
  }

  int tp = 0;
  int fp = 0;
  for (size_t idx : rank_by_score(dets)) {
    const Detection& det = dets[idx];
    bool matched = false;
    auto it = gts_by_image.find(det.image_id);
    if (it != gts_by_image.end()) {
      double overlap = 0.0;
      int g = best_gt(det.bbox, it->second, &overlap);
      if (g >= 0 && overlap >= iou_threshold && !taken[det.image_id][g]) {
        taken[det.image_id][g] = 1;
        matched = true;
      }
    }
    matched ? ++tp : ++fp;
    PrPoint point;
    point.score = det.score;
    point.recall = curve.total_positives > 0
                       ? static_cast<double>(tp) / curve.total_positives
                       : 0.0;
    point.precision = static_cast<double>(tp) / (tp + fp);
    curve.points.push_back(point);
  }
  return curve;
}

double ap_11point(const PRCurve& curve) {
  double sum = 0.0;
  for (int level = 0; level <= 10; ++level) {
    const double r = level / 10.0;
    double best = 0.0;
    for (const PrPoint& p : curve.points) {
      if (p.recall >= r && p.precision > best) best = p.precision;
    }
    sum += best;
  }
  return sum / 11.0;
}

EvalReport evaluate(const std::vector<Detection>& dets,
                    const std::vector<ImageAnnotation>& gt,
                    double iou_threshold, int jobs,
                    std::map<std::string, PRCurve>* curves_out) {
  check_threshold(iou_threshold);

  std::set<std::string> image_ids;
  for (const ImageAnnotation& a : gt) {
    if (!image_ids.insert(a.image_id).second) {
      throw DataError("duplicate ground-truth image id: " + a.image_id);
    }
  }
  for (const Detection& d : dets) {
    if (!image_ids.count(d.image_id)) {
      throw DataError("detection references unknown image id: " + d.image_id);
    }
  }

  // Ground truth per (class, image).
  std::map<std::string, std::map<std::string, std::vector<BBox>>> gt_by_class;
  for (const ImageAnnotation& a : gt) {
    for (const LabeledBox& obj : a.objects) {
      gt_by_class[obj.class_name][a.image_id].push_back(obj.bbox);
    }
  }

  std::vector<std::string> classes;
  for (const auto& [cls, unused] : gt_by_class) classes.push_back(cls);

  std::map<std::string, std::vector<Detection>> dets_by_class;
  for (const Detection& d : dets) dets_by_class[d.class_name].push_back(d);

  std::vector<PRCurve> curves(classes.size());
  std::vector<double> aps(classes.size(), 0.0);
  parallel_for(static_cast<int>(classes.size()), jobs, [&](int i) {
    const std::string& cls = classes[i];
    static const std::vector<Detection> kNone;
    auto it = dets_by_class.find(cls);
    const std::vector<Detection>& cls_dets =
        it == dets_by_class.end() ? kNone : it->second;
    curves[i] = pr_curve(cls_dets, gt_by_class[cls], iou_threshold);
    aps[i] = ap_11point(curves[i]);
  });

  EvalReport report;
  double sum = 0.0;
  for (size_t i = 0; i < classes.size(); ++i) {
    report.ap_by_class[classes[i]] = aps[i];
    sum += aps[i];
    if (curves_out) (*curves_out)[classes[i]] = std::move(curves[i]);
  }
  report.map = classes.empty() ? 0.0 : sum / static_cast<double>(classes.size());
  return report;
}

std::string report_csv(const EvalReport& report) {
  std::string out = "class,ap\n";
  for (const auto& [cls, ap] : report.ap_by_class) {
    out += cls + "," + fmt_fixed(ap, 6) + "\n";
  }
  out += "mAP," + fmt_fixed(report.map, 6) + "\n";
  return out;
}

std::string pr_curves_csv(const std::map<std::string, PRCurve>& curves) {
  std::string out = "class,rank,score,recall,precision\n";
  for (const auto& [cls, curve] : curves) {
    int rank = 0;
    for (const PrPoint& p : curve.points) {
      out += cls + "," + std::to_string(++rank) + "," + fmt_fixed(p.score, 6) +
             "," + fmt_fixed(p.recall, 6) + "," + fmt_fixed(p.precision, 6) +
             "\n";
    }
  }
  return out;
}

}  // namespace wsod
