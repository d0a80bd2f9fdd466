#include "wsod/csv.hpp"

#include <cstdio>

namespace wsod {

std::string fmt_fixed(double value, int decimals) {
  if (value == 0.0) value = 0.0;  // normalize -0.0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

}  // namespace wsod
