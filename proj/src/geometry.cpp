#include "wsod/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wsod {

namespace {

std::string describe(double xmin, double ymin, double xmax, double ymax) {
  return "(" + std::to_string(xmin) + ", " + std::to_string(ymin) + ", " +
         std::to_string(xmax) + ", " + std::to_string(ymax) + ")";
}

}  // namespace

BBox::BBox(double xmin, double ymin, double xmax, double ymax)
    : xmin(xmin), ymin(ymin), xmax(xmax), ymax(ymax) {
  if (!std::isfinite(xmin) || !std::isfinite(ymin) || !std::isfinite(xmax) ||
      !std::isfinite(ymax)) {
    throw DataError("box has non-finite coordinates " +
                    describe(xmin, ymin, xmax, ymax));
  }
  if (!(xmin < xmax) || !(ymin < ymax)) {
    throw DataError("degenerate box " + describe(xmin, ymin, xmax, ymax) +
                    ": xmin < xmax and ymin < ymax required");
  }
}

double area(const BBox& b) {
  return (b.xmax - b.xmin) * (b.ymax - b.ymin);
}

double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
  const double ih = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (area(a) + area(b) - inter);
}

}  // namespace wsod
