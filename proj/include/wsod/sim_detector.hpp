#pragma once

#include <cstdint>
#include <vector>

#include "wsod/voc_io.hpp"

namespace wsod {

/// Parameters of the synthetic detector. The detector perturbs ground-truth
/// boxes, drops some, and adds spurious boxes, all from a seeded stream.
struct OracleConfig {
  uint64_t seed = 0;
  double jitter_frac = 0.0;   // corner perturbation, fraction of box size
  double miss_rate = 0.0;     // probability of dropping a ground-truth object
  double fp_rate = 0.0;       // expected spurious boxes per image (Poisson)
  double score_noise = 0.0;   // subtractive score noise amplitude
  double epoch_gain = 0.0;    // per-epoch shrink of jitter and miss rate
};

/// Deterministic stand-in for a trained detector.
///
/// Reproducibility contract: every detect() call derives its own xoshiro256**
/// stream from (seed, image id, epochs advanced), so outputs depend only on
/// the config and the number of advance_epoch() calls — never on how many
/// images were queried before, or in which order. Draw order per surviving
/// ground-truth object: miss test, 4 corner offsets (xmin, ymin, xmax, ymax),
/// score noise. Spurious boxes follow: one Poisson count (skipped when
/// fp_rate is 0), then per box a class pick from the image's label set,
/// 4 coordinates, and a score draw in [0.1, 0.3).
class DetectorOracle {
 public:
  explicit DetectorOracle(const OracleConfig& config);

  /// Multiplies the effective jitter and miss rate by (1 - epoch_gain),
  /// floored at zero — the detector "improves" between epochs.
  void advance_epoch();

  int epochs_advanced() const { return epochs_; }
  double effective_jitter() const { return jitter_; }
  double effective_miss_rate() const { return miss_; }
  const OracleConfig& config() const { return config_; }

  /// Emits detections for one image: per ground-truth object (in order),
  /// with probability 1 - miss_rate, a jittered copy scored by closeness
  /// (score = max(0, 1 - mean corner displacement / box diagonal) minus
  /// uniform score noise, clamped to [0,1]); then spurious boxes with
  /// classes drawn from the image's label set. All boxes stay inside the
  /// image. Images without objects produce no output.
  std::vector<Detection> detect(const ImageAnnotation& gt) const;

  /// detect() over all images, concatenated in ascending image-id order.
  /// Results are independent of `jobs`.
  std::vector<Detection> detect_all(const std::vector<ImageAnnotation>& gts,
                                    int jobs = 1) const;

 private:
  OracleConfig config_;
  int epochs_ = 0;
  double jitter_ = 0.0;
  double miss_ = 0.0;
};

}  // namespace wsod
