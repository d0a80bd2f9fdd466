#pragma once

#include <string>

namespace wsod {

/// Fixed-point decimal formatting ("%.Nf"). All CSV output in this project
/// goes through this helper so golden files stay byte-exact.
std::string fmt_fixed(double value, int decimals);

}  // namespace wsod
