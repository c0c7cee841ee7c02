#include "detlab/bessel.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace detlab {

namespace {

// Ascending series sum_m (-1)^m (w/2)^{nu+2m} / (m! (m+nu)!). Fine while the
// alternating terms stay small; cancellation limits it to moderate |w|.
Complex series_j(int nu, Complex w) {
  Complex half = 0.5 * w;
  Complex term(1.0, 0.0);
  for (int k = 1; k <= nu; ++k) term *= half / double(k);
  Complex sum = term;
  Complex m2 = -half * half;
  for (int m = 1; m < 200; ++m) {
    term *= m2 / (double(m) * double(m + nu));
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum) + 1e-300) break;
  }
  return sum;
}

// Backward recurrence normalized by J_0 + 2 J_2 + 2 J_4 + ... = 1, which holds
// for every complex argument. Stable because J_n decays superexponentially in
// n beyond |w|, so the downward sweep locks onto the recessive solution.
Complex miller_j(int nu, Complex w) {
  const int start = std::max(nu, static_cast<int>(std::abs(w))) + 52;
  std::vector<Complex> f(start + 2);
  f[start + 1] = Complex(0.0, 0.0);
  f[start] = Complex(1e-280, 0.0);
  for (int n = start; n >= 1; --n) {
    f[n - 1] = (2.0 * n / w) * f[n] - f[n + 1];
    if (std::abs(f[n - 1]) > 1e250) {
      const double scale = 1e-250;
      for (int k = n - 1; k <= start + 1; ++k) f[k] *= scale;
    }
  }
  Complex norm = f[0];
  for (int n = 2; n <= start; n += 2) norm += 2.0 * f[n];
  return f[nu] / norm;
}

} // namespace

Complex bessel_j(int order, Complex w) {
  if (order < 0 || order > 40)
    throw std::invalid_argument("bessel_j: order outside validated envelope [0,40]");
  const double aw = std::abs(w);
  if (!(aw <= 60.0))
    throw std::invalid_argument("bessel_j: |w| outside validated envelope (<= 60)");
  if (aw == 0.0) return order == 0 ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
  if (aw <= 6.0) return series_j(order, w);
  return miller_j(order, w);
}

} // namespace detlab
