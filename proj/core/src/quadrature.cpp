#include "detlab/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace detlab {

namespace {

// Legendre P_n and P_n' at t via the three-term recurrence.
void legendre_pair(int n, double t, double& p, double& dp) {
  double p0 = 1.0, p1 = t;
  for (int j = 2; j <= n; ++j) {
    double p2 = ((2 * j - 1) * t * p1 - (j - 1) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (t * p1 - p0) / (t * t - 1.0);
}

} // namespace

QuadratureGrid gauss_interval(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_interval: n must be >= 1");
  if (!(a < b)) throw std::invalid_argument("gauss_interval: requires a < b");

  QuadratureGrid g;
  g.geometry = GridGeometry::Interval;
  g.x.resize(n);
  g.w.resize(n);

  if (n == 1) {
    g.x[0] = 0.5 * (a + b);
    g.w[0] = b - a;
    return g;
  }

  for (int k = 0; k < n; ++k) {
    double t = std::cos(M_PI * (k + 0.75) / (n + 0.5));
    double p, dp;
    for (int it = 0; it < 100; ++it) {
      legendre_pair(n, t, p, dp);
      double dt = p / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    legendre_pair(n, t, p, dp);
    // k counts from the right end; store ascending.
    g.x[n - 1 - k] = a + 0.5 * (b - a) * (t + 1.0);
    g.w[n - 1 - k] = (b - a) / ((1.0 - t * t) * dp * dp);
  }
  return g;
}

QuadratureGrid circle_rule(int n) {
  if (n < 1) throw std::invalid_argument("circle_rule: n must be >= 1");
  QuadratureGrid g;
  g.geometry = GridGeometry::Circle;
  g.x.resize(n);
  g.w.assign(n, 2.0 * M_PI / n);
  for (int j = 0; j < n; ++j) g.x[j] = 2.0 * M_PI * j / n;
  return g;
}

QuadratureGrid disk_product(const QuadratureGrid& radial, const QuadratureGrid& circle) {
  if (radial.geometry != GridGeometry::Interval || circle.geometry != GridGeometry::Circle)
    throw std::invalid_argument("disk_product: expects an interval rule and a circle rule");
  QuadratureGrid g;
  g.geometry = GridGeometry::Disk;
  const std::size_t n = radial.size() * circle.size();
  g.x.reserve(n);
  g.theta.reserve(n);
  g.w.reserve(n);
  for (std::size_t i = 0; i < radial.size(); ++i) {
    for (std::size_t j = 0; j < circle.size(); ++j) {
      g.x.push_back(radial.x[i]);
      g.theta.push_back(circle.x[j]);
      g.w.push_back(radial.w[i] * circle.w[j] * radial.x[i]);
    }
  }
  return g;
}

QuadratureGrid ball_radial_rule(int n) {
  QuadratureGrid g = gauss_interval(n, 0.0, 1.0);
  g.geometry = GridGeometry::RadialBall;
  for (std::size_t i = 0; i < g.size(); ++i) g.w[i] *= 4.0 * M_PI * g.x[i] * g.x[i];
  return g;
}

} // namespace detlab
