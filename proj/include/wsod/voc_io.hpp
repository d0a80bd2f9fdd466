#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wsod/geometry.hpp"

namespace wsod {

struct LabeledBox {
  std::string class_name;
  BBox bbox;

  friend bool operator==(const LabeledBox&, const LabeledBox&) = default;
};

/// Per-image set of labeled boxes. Serves as ground truth, pseudo ground
/// truth, or refined pseudo ground truth interchangeably.
struct ImageAnnotation {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::vector<LabeledBox> objects;

  friend bool operator==(const ImageAnnotation&,
                         const ImageAnnotation&) = default;
};

/// The class set of an image with all localization discarded.
struct ImageLevelLabels {
  std::string image_id;
  std::set<std::string> classes;

  friend bool operator==(const ImageLevelLabels&,
                         const ImageLevelLabels&) = default;
};

struct Detection {
  std::string image_id;
  std::string class_name;
  double score = 0.0;  // in [0, 1]; 0 and 1 are both legal
  BBox bbox;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Parses a VOC-style annotation document. Required tags: annotation,
/// filename, size/width, size/height and per object name plus
/// bndbox/{xmin,ymin,xmax,ymax}. Unknown tags and attributes are ignored,
/// object order is preserved, and a trailing image extension on the
/// filename is stripped. Boxes reaching past the image are clamped to
/// [0,width]x[0,height] (one warning per clamped box); boxes that are
/// degenerate after clamping are data errors.
ImageAnnotation parse_annotation(std::string_view xml_text,
                                 std::vector<std::string>* warnings = nullptr);

/// Emits the annotation as VOC XML (UTF-8, LF, 2-space indent). Pixel
/// coordinates are written as integers rounded half-up, so an annotation
/// with integral coordinates round-trips field-for-field.
std::string write_annotation(const ImageAnnotation& annotation);

ImageLevelLabels image_level_labels(const ImageAnnotation& annotation);

/// Line format: `image_id class score xmin ymin xmax ymax`, whitespace
/// separated. Blank lines and lines starting with '#' are skipped.
std::vector<Detection> parse_detections(std::string_view text);

/// Inverse of parse_detections; scores with 6 decimals, coordinates with 2.
std::string write_detections(const std::vector<Detection>& detections);

/// Line format: `image_id class1 class2 ...` (classes may be empty).
std::vector<ImageLevelLabels> parse_label_lines(std::string_view text);

std::string write_label_lines(const std::vector<ImageLevelLabels>& labels);

}  // namespace wsod
