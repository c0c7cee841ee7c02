#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "detlab/halfline.hpp"
#include "detlab/rng.hpp"

using namespace detlab;
using namespace detlab::halfline;

namespace {

// Analytic Jost data for the square well V = depth on [0, width]: matching of
// interior trig/hyperbolic branches to the free exponential at the edge.
struct SquareWellJost {
  Complex value_at_0, slope_at_0;
};

SquareWellJost square_well_jost(Complex depth, double a, const SpectralPoint& z) {
  const Complex w = z.root;
  const Complex kappa = principal_sqrt(z.z - depth);
  const Complex e = std::exp(Complex(0, 1) * w * a);
  SquareWellJost j;
  j.value_at_0 = e * (std::cos(kappa * a) - (Complex(0, 1) * w / kappa) * std::sin(kappa * a));
  j.slope_at_0 = e * (kappa * std::sin(kappa * a) + Complex(0, 1) * w * std::cos(kappa * a));
  return j;
}

// Dense second-order finite-difference resolvent on [0, length] with Dirichlet
// ends, solved by the Thomas algorithm; oracle for the half-line kernel.
Complex fd_green_dirichlet(Complex z, double x, double xp, double length, int n) {
  const double h = length / (n + 1);
  const int j = static_cast<int>(std::round(xp / h)) - 1;
  std::vector<Complex> diag(n, Complex(2.0, 0) / (h * h) - z), rhs(n, Complex(0, 0));
  const Complex off = Complex(-1.0, 0) / (h * h);
  rhs[j] = Complex(1.0, 0) / h;
  for (int i = 1; i < n; ++i) {
    const Complex m = off / diag[i - 1];
    diag[i] -= m * off;
    rhs[i] -= m * rhs[i - 1];
  }
  std::vector<Complex> u(n);
  u[n - 1] = rhs[n - 1] / diag[n - 1];
  for (int i = n - 2; i >= 0; --i) u[i] = (rhs[i] - off * u[i + 1]) / diag[i];
  const int k = static_cast<int>(std::round(x / h)) - 1;
  return u[k];
}

} // namespace

TEST_CASE("march grid honors breakpoints") {
  const auto g = march_grid(5.0, 0.3, {1.0});
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 5.0);
  bool has_break = false;
  for (double x : g) has_break |= (x == 1.0);
  CHECK(has_break);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] - g[i - 1] <= 0.3 + 1e-15);
}

TEST_CASE("regular solutions: free potentials") {
  const LocalPotential zero = square_well(Complex(0, 0), 1.0);
  const auto grid = march_grid(3.0, 1e-3, {});

  const SpectralPoint z1(Complex(1, 0));
  const auto free1 = regular_solutions(zero, z1, grid);
  for (std::size_t i = 0; i < grid.size(); i += 40) {
    CHECK(std::abs(free1.phi.value[i] - std::sin(grid[i])) <= 1e-12);
    CHECK(std::abs(free1.theta.value[i] - std::cos(grid[i])) <= 1e-12);
    CHECK(std::abs(free1.phi.derivative[i] - std::cos(grid[i])) <= 1e-12);
  }

  const SpectralPoint zm1(Complex(-1, 0));
  const auto freem = regular_solutions(zero, zm1, grid);
  for (std::size_t i = 0; i < grid.size(); i += 40)
    CHECK(std::abs(freem.phi.value[i] - std::sinh(grid[i])) <= 1e-12 * std::cosh(grid[i]));

  CHECK_THROWS_AS(regular_solutions(zero, SpectralPoint(Complex(0, 0)), grid),
                  std::invalid_argument);
}

TEST_CASE("regular solutions: square well piecewise oracle") {
  // Inside the well phi'' = (V0 - z) phi; outside it continues with the free
  // equation. Matching at the edge gives the closed form.
  const Complex v0(2, 0);
  const LocalPotential well = square_well(v0, 1.0);
  const SpectralPoint z(Complex(-1, 0));
  const auto grid = march_grid(2.0, 5e-4, well.breakpoints);
  const auto sol = regular_solutions(well, z, grid);

  const double mu = std::sqrt(3.0); // sqrt(V0 - z)
  const Complex phi1 = std::sinh(mu) / mu;
  const Complex dphi1 = std::cosh(mu);
  const Complex phi2 = phi1 * std::cosh(1.0) + dphi1 * std::sinh(1.0);
  CHECK(std::abs(sol.phi.value.back() - phi2) <= 1e-9 * std::abs(phi2));

  // ODE residual via centered differences, second order with stable constant.
  auto residual_constant = [&](double target_h) {
    const auto g = march_grid(2.0, target_h, well.breakpoints);
    const auto s = regular_solutions(well, z, g);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
      const double h1 = g[i] - g[i - 1], h2 = g[i + 1] - g[i];
      if (std::abs(h1 - h2) > 1e-12 || g[i] == 1.0) continue; // uniform interior only
      const Complex dd = (s.phi.value[i + 1] - 2.0 * s.phi.value[i] + s.phi.value[i - 1]) /
                         (h1 * h1);
      const Complex res = -dd + (well.evaluator(g[i]) - z.z) * s.phi.value[i];
      worst = std::max(worst, std::abs(res));
    }
    return worst / (target_h * target_h);
  };
  const double c1 = residual_constant(2e-3);
  const double c2 = residual_constant(1e-3);
  CHECK(c2 <= 3.0 * c1 + 1.0);
  CHECK(c1 <= 3.0 * c2 + 1.0);
}

TEST_CASE("jost solution") {
  const LocalPotential zero = square_well(Complex(0, 0), 1.0);
  const SpectralPoint zm1(Complex(-1, 0));
  const auto grid = march_grid(6.0, 1e-3, {});
  const auto f0 = jost_solution(zero, zm1, grid);
  // free case: exactly e^{i sqrt(z) x}; at z=-1, x=2 that is e^{-2}
  for (std::size_t i = 0; i < grid.size(); i += 100) {
    const Complex expect = std::exp(Complex(0, 1) * zm1.root * grid[i]);
    CHECK(std::abs(f0.value[i] - expect) <= 1e-12);
  }
  const std::size_t at2 =
      std::lower_bound(grid.begin(), grid.end(), 2.0) - grid.begin();
  CHECK(grid[at2] == doctest::Approx(2.0));
  CHECK(std::abs(f0.value[at2] - std::exp(-2.0)) <= 1e-12);

  const Complex v0(2, 0);
  const LocalPotential well = square_well(v0, 1.0);
  for (Complex zz : {Complex(-1, 0), Complex(-2, 0.5), Complex(1, 2)}) {
    const SpectralPoint z(zz);
    const auto g = march_grid(jost_xmax(well, z), 1e-3, well.breakpoints);
    const auto f = jost_solution(well, z, g);
    const auto oracle = square_well_jost(v0, 1.0, z);
    CHECK(std::abs(f.value.front() - oracle.value_at_0) <= 3e-8 * std::abs(oracle.value_at_0));
    CHECK(std::abs(f.derivative.front() - oracle.slope_at_0) <=
          3e-8 * std::max(1.0, std::abs(oracle.slope_at_0)));
    CHECK(f.converged);
    CHECK(!f.insufficient_range);
  }
}

TEST_CASE("wronskian") {
  // sin against cos at matching nodes
  SolutionSample s, c;
  for (int i = 0; i <= 10; ++i) {
    const double x = 0.1 * i;
    s.x.push_back(x);
    s.value.push_back(std::sin(x));
    s.derivative.push_back(std::cos(x));
    c.x.push_back(x);
    c.value.push_back(std::cos(x));
    c.derivative.push_back(-std::sin(x));
  }
  CHECK(std::abs(wronskian(s, c, s.x[5]) - Complex(-1, 0)) <= 1e-15);
  CHECK(std::abs(wronskian(s, s, s.x[3])) == 0.0);
  CHECK_THROWS_AS(wronskian(s, c, 0.55), std::invalid_argument);

  // W(f, phi)(0) equals the boundary value of the decaying solution, and is
  // x-independent since both solve the same equation.
  const LocalPotential well = square_well(Complex(2, 0), 1.0);
  const SpectralPoint z(Complex(-2, 0.5));
  const auto grid = march_grid(jost_xmax(well, z), 1e-3, well.breakpoints);
  const auto f = jost_solution(well, z, grid);
  const auto reg = regular_solutions(well, z, grid);
  const Complex w0 = wronskian(f, reg.phi, 0.0);
  CHECK(std::abs(w0 - f.value.front()) <= 1e-10 * std::abs(f.value.front()));
  for (int k = 1; k <= 10; ++k) {
    const double x = grid[k * (grid.size() - 1) / 11];
    const Complex wx = wronskian(f, reg.phi, x);
    CHECK(std::abs(wx - w0) <= 1e-8 * std::abs(w0));
  }
}

TEST_CASE("m-functions") {
  const SpectralPoint zm1(Complex(-1, 0));
  const LocalPotential zero = square_well(Complex(0, 0), 1.0);
  const auto m = m_functions(zero, zm1);
  CHECK(std::abs(m.m0_dirichlet - Complex(-1, 0)) <= 1e-15);
  CHECK(std::abs(m.m0_neumann - Complex(1, 0)) <= 1e-15);
  CHECK(std::abs(m.m_dirichlet - m.m0_dirichlet) <= 1e-11);
  CHECK(std::abs(m.m_neumann - m.m0_neumann) <= 1e-11);

  Rng rng(23);
  for (int t = 0; t < 50; ++t) {
    Complex z = rng.next_complex(5.0);
    if (std::abs(z) < 0.1 || (z.imag() == 0.0 && z.real() >= 0.0)) continue;
    const auto mm = m_functions(zero, SpectralPoint(z), 0.2); // coarse grid, exact free case
    CHECK(std::abs(mm.m0_neumann + 1.0 / mm.m0_dirichlet) <= 1e-14 * std::abs(mm.m0_neumann));
  }
}

TEST_CASE("half-line resolvent kernels") {
  const SpectralPoint z(Complex(-1, 0));
  for (double xp : {0.5, 1.7, 3.0}) {
    CHECK(std::abs(halfline_green(Bc::Dirichlet, z, 0.0, xp)) == 0.0);
    // Neumann slope at the origin vanishes: forward difference is O(h)
    const double h = 1e-6;
    const Complex slope =
        (halfline_green(Bc::Neumann, z, h, xp) - halfline_green(Bc::Neumann, z, 0.0, xp)) / h;
    CHECK(std::abs(slope) <= 1e-5);
  }

  // symmetry of the kernel
  CHECK(std::abs(halfline_green(Bc::Dirichlet, z, 0.7, 2.1) -
                 halfline_green(Bc::Dirichlet, z, 2.1, 0.7)) <= 1e-15);

  // dense finite-difference oracle
  for (auto [x, xp] : std::vector<std::pair<double, double>>{{1.0, 2.0}, {0.5, 0.9}, {3.2, 1.1}}) {
    const Complex fd = fd_green_dirichlet(Complex(-1, 0), x, xp, 40.0, 3999);
    CHECK(std::abs(halfline_green(Bc::Dirichlet, z, x, xp) - fd) <= 1e-5);
  }

  CHECK_THROWS_AS(halfline_green(Bc::Dirichlet, SpectralPoint(Complex(2, 0)), 1.0, 2.0),
                  std::invalid_argument);
}

TEST_CASE("half-line Birman-Schwinger determinants: square well") {
  const Complex v0(2, 0);
  const LocalPotential well = square_well(v0, 1.0);
  const LocalPotential zero = square_well(Complex(0, 0), 1.0);

  const SpectralPoint zm1(Complex(-1, 0));
  CHECK(bs_determinant_halfline(Bc::Dirichlet, zero, zm1, 30.0, 64).value == Complex(1, 0));

  for (Complex zz : {Complex(-1, 0), Complex(-2, 0.5), Complex(1, 2)}) {
    const SpectralPoint z(zz);
    const auto oracle = square_well_jost(v0, 1.0, z);
    const auto dd = bs_determinant_halfline(Bc::Dirichlet, well, z, 30.0, 500);
    const auto dn = bs_determinant_halfline(Bc::Neumann, well, z, 30.0, 500);
    CHECK(std::abs(dd.value - oracle.value_at_0) <= 4e-6);
    const Complex neumann_ref = oracle.slope_at_0 / (Complex(0, 1) * z.root);
    CHECK(std::abs(dn.value - neumann_ref) <= 4e-6);
    CHECK(!dd.truncation_flag);
  }

  // conjugation symmetry for the real-valued well
  const SpectralPoint zc(Complex(-2, 0.5));
  const SpectralPoint zcc(Complex(-2, -0.5));
  const Complex d1 = bs_determinant_halfline(Bc::Dirichlet, well, zc, 30.0, 300).value;
  const Complex d2 = bs_determinant_halfline(Bc::Dirichlet, well, zcc, 30.0, 300).value;
  CHECK(std::abs(d2 - std::conj(d1)) <= 1e-10 * std::abs(d1));

  CHECK_THROWS_AS(bs_determinant_halfline(Bc::Dirichlet, well, zm1, 30.0, 8),
                  std::invalid_argument);
  CHECK_THROWS_AS(bs_determinant_halfline(Bc::Dirichlet, well, zm1, 0.5, 64),
                  std::invalid_argument);
}

TEST_CASE("ratio identity chain") {
  const LocalPotential zero = square_well(Complex(0, 0), 1.0);
  const SpectralPoint z(Complex(-1.5, 0.25));
  const auto free_chain = ratio_identity_check(zero, z, 30.0, 64);
  for (Complex q : {free_chain.det_ratio, free_chain.jost_ratio, free_chain.m_dirichlet_ratio,
                    free_chain.m_neumann_ratio})
    CHECK(std::abs(q - Complex(1, 0)) <= 1e-11);

  const LocalPotential well = square_well(Complex(2, 0), 1.0);
  const auto r = ratio_identity_check(well, SpectralPoint(Complex(-1, 0)), 30.0, 1000);
  CHECK(!r.dirichlet_eigenvalue_flag);
  CHECK(r.max_residual <= 1e-6);

  // refinement: residual decreases along the ladder (within 2x noise)
  double prev = 1e9;
  for (int n : {250, 500, 1000}) {
    const auto rr = ratio_identity_check(well, SpectralPoint(Complex(-1, 0)), 30.0, n);
    CHECK(rr.max_residual <= 2.0 * prev);
    prev = rr.max_residual;
  }
}

TEST_CASE("gaussian bump potential sanity") {
  const LocalPotential g = gaussian_bump(1.5, 1.0, 0.4);
  CHECK(std::abs(g.evaluator(g.support_bound)) <= 1.6e-14);
  const SpectralPoint z(Complex(-2, 0.3));
  // chain identity for a smooth potential
  const auto r = ratio_identity_check(g, z, 12.0, 400);
  CHECK(r.max_residual <= 5e-6);
}

TEST_CASE("reported L1 estimate dominates the quadrature norm") {
  for (const LocalPotential& v :
       {square_well(Complex(2, 0), 1.0), square_well(Complex(-4, 3), 1.7),
        gaussian_bump(1.5, 1.0, 0.4)}) {
    const QuadratureGrid g = gauss_interval(200, 0.0, v.support_bound);
    double integral = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) integral += g.w[i] * std::abs(v.evaluator(g.x[i]));
    CHECK(v.l1_norm_estimate >= integral - 1e-12);
  }
}

TEST_CASE("determinant identities across the square-well family") {
  // Depths up to |V0| = 5 (one of them non-self-adjoint), widths up to 2. The
  // identity holds with a second-order tolerance whose constant grows with the
  // well strength; the strongest member sits near 2e-5 absolute at n = 1000.
  const std::vector<std::pair<Complex, double>> family = {
      {Complex(5, 0), 2.0}, {Complex(-5, 0), 0.5}, {Complex(1, 1), 1.3}, {Complex(-2.5, 0), 1.0}};
  const std::vector<Complex> zs = {Complex(-1, 0), Complex(1, 2)};
  for (const auto& [depth, width] : family) {
    const LocalPotential v = square_well(depth, width);
    for (const Complex& zz : zs) {
      const SpectralPoint z(zz);
      const Complex w = z.root;
      const Complex kappa = principal_sqrt(z.z - depth);
      const Complex e = std::exp(Complex(0, 1) * w * width);
      const Complex f0 =
          e * (std::cos(kappa * width) - (Complex(0, 1) * w / kappa) * std::sin(kappa * width));
      const Complex f1 =
          e * (kappa * std::sin(kappa * width) + Complex(0, 1) * w * std::cos(kappa * width));
      const Complex nref = f1 / (Complex(0, 1) * w);

      const double ed500 =
          std::abs(bs_determinant_halfline(Bc::Dirichlet, v, z, 30.0, 500).value - f0);
      const double ed1000 =
          std::abs(bs_determinant_halfline(Bc::Dirichlet, v, z, 30.0, 1000).value - f0);
      const double en1000 =
          std::abs(bs_determinant_halfline(Bc::Neumann, v, z, 30.0, 1000).value - nref);
      CHECK(ed1000 <= 1e-4);
      CHECK(en1000 <= 3e-4);
      // second-order refinement
      CHECK(ed500 / std::max(ed1000, 1e-14) >= 2.5);
    }
  }
}
