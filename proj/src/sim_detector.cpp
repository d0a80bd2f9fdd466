#include "wsod/sim_detector.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "wsod/error.hpp"
#include "wsod/rng.hpp"
#include "parallel.hpp"

namespace wsod {

namespace {

constexpr double kMinBoxSize = 1e-3;

void check_config(const OracleConfig& c) {
  auto nonnegative = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DataError(std::string("oracle ") + name + " must be finite and "
                      ">= 0");
    }
  };
  nonnegative(c.jitter_frac, "jitter_frac");
  nonnegative(c.fp_rate, "fp_rate");
  nonnegative(c.score_noise, "score_noise");
  nonnegative(c.epoch_gain, "epoch_gain");
  if (!(c.miss_rate >= 0.0 && c.miss_rate <= 1.0)) {
    throw DataError("oracle miss_rate must lie in [0,1]");
  }
}

/// Orders a coordinate pair and enforces a minimum extent inside [0, limit].
void repair_interval(double& lo, double& hi, double limit) {
  if (lo > hi) std::swap(lo, hi);
  lo = std::clamp(lo, 0.0, limit);
  hi = std::clamp(hi, 0.0, limit);
  if (hi - lo < kMinBoxSize) {
    double mid = std::clamp((lo + hi) / 2.0, kMinBoxSize / 2.0,
                            limit - kMinBoxSize / 2.0);
    lo = mid - kMinBoxSize / 2.0;
    hi = mid + kMinBoxSize / 2.0;
  }
}

uint64_t stream_seed(uint64_t seed, const std::string& image_id, int epoch) {
  uint64_t state = seed ^ fnv1a64(image_id);
  uint64_t mixed = splitmix64_next(state);
  state = mixed + static_cast<uint64_t>(epoch);
  return splitmix64_next(state);
}

}  // namespace

DetectorOracle::DetectorOracle(const OracleConfig& config)
    : config_(config),
      jitter_(config.jitter_frac),
      miss_(config.miss_rate) {
  check_config(config);
}

void DetectorOracle::advance_epoch() {
  ++epochs_;
  const double factor = 1.0 - config_.epoch_gain;
  jitter_ = std::max(0.0, jitter_ * factor);
  miss_ = std::max(0.0, miss_ * factor);
}

std::vector<Detection> DetectorOracle::detect(const ImageAnnotation& gt) const {
  Rng rng(stream_seed(config_.seed, gt.image_id, epochs_));
  const double img_w = gt.width;
  const double img_h = gt.height;

  std::vector<Detection> out;
  for (const LabeledBox& obj : gt.objects) {
    if (rng.next_double() < miss_) continue;
    const double w = obj.bbox.width();
    const double h = obj.bbox.height();
    const double dx0 = rng.uniform(-jitter_, jitter_) * w;
    const double dy0 = rng.uniform(-jitter_, jitter_) * h;
    const double dx1 = rng.uniform(-jitter_, jitter_) * w;
    const double dy1 = rng.uniform(-jitter_, jitter_) * h;
    double x0 = obj.bbox.xmin + dx0;
    double y0 = obj.bbox.ymin + dy0;
    double x1 = obj.bbox.xmax + dx1;
    double y1 = obj.bbox.ymax + dy1;
    repair_interval(x0, x1, img_w);
    repair_interval(y0, y1, img_h);

    const double displacement =
        (std::hypot(dx0, dy0) + std::hypot(dx1, dy1)) / 2.0;
    const double base = std::max(0.0, 1.0 - displacement / std::hypot(w, h));
    const double noise = config_.score_noise * rng.next_double();
    const double score = std::clamp(base - noise, 0.0, 1.0);
    out.push_back({gt.image_id, obj.class_name, score, BBox(x0, y0, x1, y1)});
  }

  if (config_.fp_rate > 0.0 && !gt.objects.empty()) {
    std::set<std::string> label_set;
    for (const LabeledBox& obj : gt.objects) label_set.insert(obj.class_name);
    std::vector<std::string> labels(label_set.begin(), label_set.end());

    const int spurious = rng.poisson(config_.fp_rate);
    for (int i = 0; i < spurious; ++i) {
      const std::string& cls = labels[rng.next_below(labels.size())];
      double x0 = rng.uniform(0.0, img_w);
      double x1 = rng.uniform(0.0, img_w);
      double y0 = rng.uniform(0.0, img_h);
      double y1 = rng.uniform(0.0, img_h);
      repair_interval(x0, x1, img_w);
      repair_interval(y0, y1, img_h);
      const double score = 0.1 + 0.2 * rng.next_double();
      out.push_back({gt.image_id, cls, score, BBox(x0, y0, x1, y1)});
    }
  }
  return out;
}

std::vector<Detection> DetectorOracle::detect_all(
    const std::vector<ImageAnnotation>& gts, int jobs) const {
  std::vector<const ImageAnnotation*> ordered;
  ordered.reserve(gts.size());
  for (const ImageAnnotation& a : gts) ordered.push_back(&a);
  std::sort(ordered.begin(), ordered.end(),
            [](const ImageAnnotation* a, const ImageAnnotation* b) {
              return a->image_id < b->image_id;
            });

  std::vector<std::vector<Detection>> per_image(ordered.size());
  parallel_for(static_cast<int>(ordered.size()), jobs,
               [&](int i) { per_image[i] = detect(*ordered[i]); });

  std::vector<Detection> out;
  for (std::vector<Detection>& dets : per_image) {
    out.insert(out.end(), dets.begin(), dets.end());
  }
  return out;
}

}  // namespace wsod
