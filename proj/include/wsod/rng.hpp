#pragma once

#include <cstdint>
#include <string_view>

namespace wsod {

/// splitmix64 finalizer step; also usable as a 64-bit hash mixer.
uint64_t splitmix64_next(uint64_t& state);

/// FNV-1a 64-bit hash, used to derive per-image generator streams.
uint64_t fnv1a64(std::string_view s);

/// xoshiro256** 1.0, seeded through splitmix64. Chosen over std::mt19937
/// because the whole chain (generator plus the mappings below) is pinned
/// here and reproduces bit-identically on any platform.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  /// Uniform double in [0, 1), 53-bit mantissa construction.
  double next_double();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n) via modulo mapping; n must be > 0.
  uint64_t next_below(uint64_t n);

  /// Poisson sample by Knuth's multiplication method. mean == 0 consumes
  /// no draws and returns 0.
  int poisson(double mean);

 private:
  uint64_t state_[4];
};

}  // namespace wsod
