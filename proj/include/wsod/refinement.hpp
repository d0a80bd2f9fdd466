#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wsod/evaluation.hpp"
#include "wsod/pgt_miner.hpp"
#include "wsod/sim_detector.hpp"

namespace wsod {

/// When to refine the pseudo ground truth during second-phase training.
enum class TimingRule {
  kEveryEpoch,      // after each epoch
  kEveryThird,      // every three epochs
  kLastThree,       // after each of the last three epochs
  kOnceAtTwoThirds  // once, at round(2/3 * max_epochs)
};

/// Which of the current k pseudo-ground-truth boxes to replace.
enum class UpdateRule {
  kAll,       // replace everything with fresh top-k
  kBestHalf,  // replace the floor(m/2) highest-scored current entries
  kWorstHalf  // replace the floor(m/2) lowest-scored current entries
};

struct RefinementPolicy {
  TimingRule timing = TimingRule::kEveryEpoch;
  UpdateRule update = UpdateRule::kAll;
  int k = 1;
};

/// Half-update policies with k < 2 never replace anything; flag it.
std::optional<std::string> policy_warning(const RefinementPolicy& policy);

/// Epoch is 1-based. EveryThird and LastThree require max_epochs >= 3.
bool should_refine(int epoch, int max_epochs, TimingRule timing);

/// Applies one update rule to the current entries of one (image, class).
/// `fresh` is defensively re-sorted by descending score. Replaced entries
/// carry the fresh scores; a fresh box exactly equal to a kept entry is
/// skipped in favor of the next one. When fewer fresh detections exist
/// than the replacement quota, the leftover current entries are kept.
/// The result is ordered by descending score.
std::vector<ScoredPgtEntry> refine_image_class(
    const std::vector<ScoredPgtEntry>& current,
    const std::vector<Detection>& fresh, UpdateRule update, int k);

/// refine_image_class per (image, class in that image's label set), with
/// the same label gating and box clamping as mining. Output is ordered by
/// image id. Results are independent of `jobs`.
std::vector<ScoredPgt> refine_dataset(
    const std::vector<ScoredPgt>& pgt, const std::vector<Detection>& fresh,
    const std::vector<ImageLevelLabels>& labels,
    const RefinementPolicy& policy,
    std::vector<MiningWarning>* warnings = nullptr, int jobs = 1);

struct EpochRecord {
  int epoch = 0;
  bool refined = false;
  double map = 0.0;
};

struct RefinementRun {
  std::vector<EpochRecord> epochs;
  std::vector<ScoredPgt> final_pgt;
};

/// Mines initial pseudo ground truth from the oracle, then runs the epoch
/// loop: advance the oracle, refine when the timing rule fires, and record
/// the pseudo-ground-truth-vs-ground-truth mAP. The oracle instance (and
/// with it the simulated training state) persists across refinements.
RefinementRun run_refinement_loop(DetectorOracle& oracle,
                                  const std::vector<ImageAnnotation>& gt,
                                  const RefinementPolicy& policy,
                                  int max_epochs, double iou_threshold = 0.5,
                                  int jobs = 1);

/// CSV: header `epoch,refined,map`; refined is 0/1, map has 6 decimals.
std::string epoch_csv(const std::vector<EpochRecord>& epochs);

}  // namespace wsod
