#pragma once

#include <cstdint>

#include "detlab/types.hpp"

namespace detlab {

/// splitmix64, used for all randomized trials so that sequences are
/// reproducible across platforms and standard-library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  Complex next_complex(double scale = 1.0) {
    return Complex(scale * (2.0 * next_double() - 1.0), scale * (2.0 * next_double() - 1.0));
  }

 private:
  std::uint64_t state_;
};

} // namespace detlab
