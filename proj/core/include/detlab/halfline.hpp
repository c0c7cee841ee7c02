#pragma once

#include <functional>
#include <vector>

#include "detlab/linalg.hpp"
#include "detlab/spectral.hpp"
#include "detlab/types.hpp"

namespace detlab::halfline {

using detlab::Bc;

/// Local potential V(x) on the half-line, integrable, numerically supported
/// on [0, support_bound]. `breakpoints` lists interior smoothness breaks so
/// marching grids can place nodes on them.
struct LocalPotential {
  std::function<Complex(double)> evaluator;
  double support_bound = 0.0;
  double l1_norm_estimate = 0.0;
  std::vector<double> breakpoints;
};

LocalPotential square_well(Complex depth, double width);
LocalPotential gaussian_bump(double amplitude, double center, double width);

/// Sampled solution of -psi'' + V psi = z psi with its derivative.
struct SolutionSample {
  std::vector<double> x;
  std::vector<Complex> value;
  std::vector<Complex> derivative;
  bool converged = true;
};

/// Uniform-per-piece grid on [0, x_max] with nodes on every breakpoint,
/// step <= target_h.
std::vector<double> march_grid(double x_max, double target_h,
                               const std::vector<double>& breakpoints);

struct RegularPair {
  SolutionSample phi;   // phi(0) = 0, phi'(0) = 1
  SolutionSample theta; // theta(0) = 1, theta'(0) = 0
};

/// Trapezoid-marched Volterra solutions with one Richardson level.
RegularPair regular_solutions(const LocalPotential& V, const SpectralPoint& z,
                              const std::vector<double>& x_grid);

struct JostSample : SolutionSample {
  bool insufficient_range = false; // |V(x_max)| > 1e-12
};

/// Solution asymptotic to e^{i z^{1/2} x}, marched backward from the last grid
/// node where it is initialized with the free value.
JostSample jost_solution(const LocalPotential& V, const SpectralPoint& z,
                         const std::vector<double>& x_grid);

/// Truncation radius for the backward march.
double jost_xmax(const LocalPotential& V, const SpectralPoint& z);

/// f(x) g'(x) - f'(x) g(x); x must be a node of both samples.
Complex wronskian(const SolutionSample& f, const SolutionSample& g, double x);

struct MFunctions {
  Complex m0_dirichlet; // i z^{1/2}
  Complex m0_neumann;   // i z^{-1/2}
  Complex m_dirichlet;  // f'(z,0) / f(z,0)
  Complex m_neumann;    // -f(z,0) / f'(z,0)
  Complex jost_value;   // f(z,0)
  Complex jost_slope;   // f'(z,0)
  bool dirichlet_eigenvalue_hit = false;
  bool neumann_eigenvalue_hit = false;
};

MFunctions m_functions(const LocalPotential& V, const SpectralPoint& z,
                       double target_h = 2e-3);

/// Kernel of (H0^{bc} - z)^{-1} on the half-line; requires Im(z^{1/2}) > 0.
Complex halfline_green(Bc bc, const SpectralPoint& z, double x, double xp);

struct HalflineDet {
  Complex value{};
  bool truncation_flag = false; // |V(L)| > 1e-12
  bool zero_pivot = false;
};

/// Nystrom determinant of I + u (H0^{bc}-z)^{-1} v with u = e^{i arg V}|V|^{1/2},
/// v = |V|^{1/2}, on a Gauss rule over the effective support [0, min(L, support_bound)].
/// The operator vanishes off supp V, so the restriction is exact.
HalflineDet bs_determinant_halfline(Bc bc, const LocalPotential& V, const SpectralPoint& z,
                                    double L, int n);

struct RatioIdentityReport {
  SpectralPoint z;
  Complex det_ratio;        // det_N / det_D
  Complex jost_ratio;       // f'(z,0) / (i z^{1/2} f(z,0))
  Complex m_dirichlet_ratio; // m^D / m0^D
  Complex m_neumann_ratio;   // m0^N / m^N
  double max_residual = 0.0;
  bool dirichlet_eigenvalue_flag = false;
};

RatioIdentityReport ratio_identity_check(const LocalPotential& V, const SpectralPoint& z,
                                         double L, int n);

} // namespace detlab::halfline
