#pragma once

#include "detlab/types.hpp"

namespace detlab {

/// Square root with the branch cut along [0, inf): Im(w) >= 0 always,
/// and w > 0 on the positive real axis (limit from the upper half-plane).
inline Complex principal_sqrt(Complex z) {
  Complex w = std::sqrt(z);
  if (w.imag() < 0.0 || (w.imag() == 0.0 && w.real() < 0.0)) w = -w;
  return w;
}

/// Spectral parameter z with its branch-correct root cached.
struct SpectralPoint {
  Complex z;
  Complex root; // z^{1/2}, Im >= 0

  explicit SpectralPoint(Complex z_) : z(z_), root(principal_sqrt(z_)) {}
  SpectralPoint(double re, double im) : SpectralPoint(Complex(re, im)) {}
};

} // namespace detlab
