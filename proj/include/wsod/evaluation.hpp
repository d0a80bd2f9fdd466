#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wsod/voc_io.hpp"

namespace wsod {

/// Outcome of matching one image's detections of one class against that
/// image's ground-truth boxes.
struct MatchResult {
  std::vector<char> is_tp;  // aligned with the input detection order
  int fn = 0;
  double iou_threshold = 0.5;

  int tp() const;
  int fp() const { return static_cast<int>(is_tp.size()) - tp(); }
};

/// Greedy matching in descending score order (ties by input order). Each
/// detection is paired with the ground-truth box of maximal IoU (lowest
/// index on ties); it is a TP when that IoU >= iou_threshold and the box
/// is not yet consumed, otherwise an FP — so a duplicate of an already
/// matched box always counts as FP. Unconsumed boxes are FNs.
MatchResult match_class_in_image(const std::vector<Detection>& dets,
                                 const std::vector<BBox>& gts,
                                 double iou_threshold);

/// Eq.-style precision/recall with the 0/0 -> 0 convention.
std::pair<double, double> precision_recall(const MatchResult& m);

struct PrPoint {
  double score;
  double recall;
  double precision;
};

struct PRCurve {
  std::vector<PrPoint> points;  // one per ranked detection
  int total_positives = 0;      // recall denominator (TP + FN)

  bool has_ground_truth() const { return total_positives > 0; }
};

/// Ranks one class's detections across all images by descending score
/// (ties by input order) and accumulates (recall, precision) after each
/// rank. gts_by_image maps image id to that image's boxes of the class.
PRCurve pr_curve(const std::vector<Detection>& dets,
                 const std::map<std::string, std::vector<BBox>>& gts_by_image,
                 double iou_threshold);

/// VOC-2007 11-point interpolated average precision: the mean over recall
/// levels {0, 0.1, ..., 1} of the maximum precision at recall >= level
/// (0 when no point reaches the level).
double ap_11point(const PRCurve& curve);

struct EvalReport {
  /// Classes with at least one ground-truth instance.
  std::map<std::string, double> ap_by_class;
  double map = 0.0;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Full evaluation chain. Every detection image id must appear in gt.
/// Classes that never occur in the ground truth are excluded from mAP.
/// Results are independent of `jobs`.
EvalReport evaluate(const std::vector<Detection>& dets,
                    const std::vector<ImageAnnotation>& gt,
                    double iou_threshold, int jobs = 1,
                    std::map<std::string, PRCurve>* curves_out = nullptr);

/// CSV: header `class,ap`, one row per class, final row `mAP,<value>`.
std::string report_csv(const EvalReport& report);

/// CSV: `class,rank,score,recall,precision` rows for every curve point.
std::string pr_curves_csv(const std::map<std::string, PRCurve>& curves);

}  // namespace wsod
