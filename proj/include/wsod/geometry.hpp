#pragma once

#include "wsod/error.hpp"

namespace wsod {

/// Axis-aligned box in pixel coordinates, VOC corner convention.
/// Geometry is continuous: no inclusive-pixel +1 term anywhere.
struct BBox {
  double xmin;
  double ymin;
  double xmax;
  double ymax;

  /// Throws DataError unless all coordinates are finite, xmin < xmax and
  /// ymin < ymax. Zero-area boxes are rejected rather than clamped.
  BBox(double xmin, double ymin, double xmax, double ymax);

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

double area(const BBox& b);

/// Intersection over union in [0, 1]; 0 for disjoint boxes.
double iou(const BBox& a, const BBox& b);

}  // namespace wsod
