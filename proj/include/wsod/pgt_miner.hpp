#pragma once

#include <map>
#include <string>
#include <vector>

#include "wsod/voc_io.hpp"

namespace wsod {

struct MiningConfig {
  int k = 1;  // top boxes per present class per image, >= 1
};

struct ImageSize {
  int width = 0;
  int height = 0;
};

/// A pseudo-ground-truth object with the detector score it was created
/// from. Scores never reach the annotation XML; they drive refinement.
struct ScoredPgtEntry {
  std::string class_name;
  BBox bbox;
  double score = 0.0;

  friend bool operator==(const ScoredPgtEntry&,
                         const ScoredPgtEntry&) = default;
};

/// Pseudo ground truth for one image. Entries are ordered by class name
/// ascending, then descending score within a class.
struct ScoredPgt {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::vector<ScoredPgtEntry> entries;

  friend bool operator==(const ScoredPgt&, const ScoredPgt&) = default;
};

ImageAnnotation to_annotation(const ScoredPgt& pgt);

std::vector<Detection> pgt_as_detections(const std::vector<ScoredPgt>& pgt);

struct MiningWarning {
  std::string image_id;
  std::string class_name;
  std::string message;
};

/// Selects, for each class in `labels`, the top-k detections of that class
/// by descending score (ties by input order). Classes absent from the
/// label set contribute nothing even when detected; a labeled class with
/// no detections yields zero objects plus a warning. Selected boxes are
/// clamped to the image bounds.
ScoredPgt mine_image(const std::vector<Detection>& dets,
                     const ImageLevelLabels& labels, const MiningConfig& cfg,
                     ImageSize size,
                     std::vector<MiningWarning>* warnings = nullptr);

/// mine_image over every labeled image; output is ordered by image id and
/// has exactly one entry per label record (possibly with no objects).
/// Detections naming an unknown image id are data errors. Results are
/// independent of `jobs`.
std::vector<ScoredPgt> mine_dataset(
    const std::vector<Detection>& dets,
    const std::vector<ImageLevelLabels>& labels,
    const std::map<std::string, ImageSize>& sizes, const MiningConfig& cfg,
    std::vector<MiningWarning>* warnings = nullptr, int jobs = 1);

}  // namespace wsod
