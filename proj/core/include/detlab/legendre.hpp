#pragma once

#include <vector>

#include "detlab/quadrature.hpp"
#include "detlab/types.hpp"

namespace detlab {

/// Dense collocation operators on a Gauss-Legendre grid over [a, b]: the
/// degree-(n-1) interpolant through the nodes is integrated/differentiated
/// exactly, so all three matrices are spectrally accurate for analytic data.
struct SpectralOps {
  RealMatrix integrate_below; // (Q f)_i ~ int_a^{x_i} f
  RealMatrix integrate_above; // (Q f)_i ~ int_{x_i}^b f
  RealVector full_weights;    // plain Gauss weights (row sum of integrate_below at b)
  RealMatrix differentiate;   // (D f)_i ~ f'(x_i)
};

SpectralOps make_spectral_ops(const QuadratureGrid& gauss_grid, double a, double b);

/// Real-coefficient polynomial in r, lowest degree first.
using PolyCoeffs = std::vector<double>;

Complex poly_eval(const std::vector<Complex>& coeffs, double r);
std::vector<Complex> poly_derivative(const std::vector<Complex>& coeffs);

} // namespace detlab
