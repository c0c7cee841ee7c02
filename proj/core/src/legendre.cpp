#include "detlab/legendre.hpp"

#include <stdexcept>

namespace detlab {

namespace {

// P_0..P_{nmax} at s into `vals`.
void legendre_all(int nmax, double s, std::vector<double>& vals) {
  vals.resize(nmax + 1);
  vals[0] = 1.0;
  if (nmax >= 1) vals[1] = s;
  for (int k = 2; k <= nmax; ++k)
    vals[k] = ((2 * k - 1) * s * vals[k - 1] - (k - 1) * vals[k - 2]) / k;
}

} // namespace

SpectralOps make_spectral_ops(const QuadratureGrid& grid, double a, double b) {
  if (grid.geometry != GridGeometry::Interval)
    throw std::invalid_argument("make_spectral_ops: interval grid required");
  const int n = static_cast<int>(grid.size());
  const double half = 0.5 * (b - a);

  // Nodes mapped to s in [-1,1]; Gauss weights on [-1,1].
  std::vector<double> s(n), ws(n);
  for (int i = 0; i < n; ++i) {
    s[i] = (grid.x[i] - a) / half - 1.0;
    ws[i] = grid.w[i] / half;
  }

  // Value -> Legendre coefficient transform, exact through degree n-1.
  RealMatrix C(n, n);
  std::vector<double> P;
  for (int j = 0; j < n; ++j) {
    legendre_all(n - 1, s[j], P);
    for (int k = 0; k < n; ++k) C(k, j) = (2.0 * k + 1.0) / 2.0 * ws[j] * P[k];
  }

  // Coefficient -> antiderivative values: int_{-1}^{s} P_k = (P_{k+1}-P_{k-1})/(2k+1),
  // with int_{-1}^{s} P_0 = P_1 + P_0.
  RealMatrix B(n, n);
  for (int i = 0; i < n; ++i) {
    legendre_all(n, s[i], P);
    B(i, 0) = P[1] + P[0];
    for (int k = 1; k < n; ++k) B(i, k) = (P[k + 1] - P[k - 1]) / (2.0 * k + 1.0);
  }

  SpectralOps ops;
  ops.integrate_below = half * (B * C);
  ops.full_weights = RealVector::Map(grid.w.data(), n);
  ops.integrate_above = -ops.integrate_below;
  for (int i = 0; i < n; ++i) ops.integrate_above.row(i) += ops.full_weights.transpose();

  // Derivative of the interpolant: c'_k = sum_{j>=k+1, j-k odd} (2k+1) c_j, scaled by 1/half.
  RealMatrix Dc = RealMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (int j = k + 1; j < n; ++j)
      if ((j - k) % 2 == 1) Dc(k, j) = 2.0 * k + 1.0;
  RealMatrix V(n, n); // coefficients -> values
  for (int i = 0; i < n; ++i) {
    legendre_all(n - 1, s[i], P);
    for (int k = 0; k < n; ++k) V(i, k) = P[k];
  }
  ops.differentiate = (V * Dc * C) / half;
  return ops;
}

Complex poly_eval(const std::vector<Complex>& coeffs, double r) {
  Complex v(0.0, 0.0);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * r + *it;
  return v;
}

std::vector<Complex> poly_derivative(const std::vector<Complex>& coeffs) {
  std::vector<Complex> d;
  for (std::size_t k = 1; k < coeffs.size(); ++k) d.push_back(double(k) * coeffs[k]);
  return d;
}

} // namespace detlab
