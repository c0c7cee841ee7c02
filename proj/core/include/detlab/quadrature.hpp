#pragma once

#include <cstddef>
#include <vector>

#include "detlab/types.hpp"

namespace detlab {

enum class GridGeometry { Interval, Circle, Disk, RadialBall };

/// Quadrature nodes and weights. For intervals and radial rules `x` holds the
/// abscissas, for circle rules the angles. Disk grids are polar products and
/// use (x, theta) pairs with the area Jacobian folded into the weight.
struct QuadratureGrid {
  GridGeometry geometry = GridGeometry::Interval;
  std::vector<double> x;
  std::vector<double> theta; // populated for Disk grids only
  std::vector<double> w;

  std::size_t size() const { return w.size(); }
};

/// n-point Gauss-Legendre rule on [a, b]; exact for polynomials of degree 2n-1.
QuadratureGrid gauss_interval(int n, double a, double b);

/// n equispaced angles 2*pi*j/n with uniform weights 2*pi/n.
QuadratureGrid circle_rule(int n);

/// Polar product of a radial rule on (0,1) and a circle rule; weights carry r dr dtheta.
QuadratureGrid disk_product(const QuadratureGrid& radial, const QuadratureGrid& circle);

/// Gauss rule on (0,1) with weights carrying the spherical measure 4*pi*r^2 dr.
QuadratureGrid ball_radial_rule(int n);

} // namespace detlab
