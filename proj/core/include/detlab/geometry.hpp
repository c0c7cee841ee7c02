#pragma once

#include <vector>

#include "detlab/legendre.hpp"
#include "detlab/linalg.hpp"
#include "detlab/quadrature.hpp"
#include "detlab/spectral.hpp"
#include "detlab/types.hpp"

namespace detlab::geom {

enum class DomainKind { Disk, BallRadial };

/// Separable geometry: the unit disk resolved into azimuthal modes |n| <= cutoff,
/// or the radially symmetric sector of the unit ball (l = 0 only).
struct ModalDomain {
  DomainKind kind = DomainKind::Disk;
  int mode_cutoff = 0;
  QuadratureGrid radial;   // Gauss rule on (0,1), plain dr weights
  QuadratureGrid boundary; // circle rule | single point of weight 4*pi
  SpectralOps radial_ops;  // spectral integration/differentiation on `radial`
  RealVector radial_bary;  // barycentric weights for off-node evaluation

  int n_modes() const { return kind == DomainKind::Disk ? 2 * mode_cutoff + 1 : 1; }
  int mode_at(int idx) const { return kind == DomainKind::Disk ? idx - mode_cutoff : 0; }
  int index_of(int mode) const { return kind == DomainKind::Disk ? mode + mode_cutoff : 0; }
  /// Radial measure weight: r (disk) or r^2 (ball).
  double measure(double r) const { return kind == DomainKind::Disk ? r : r * r; }
  /// Solid-angle factor of the mode expansion: 2*pi (disk) or 4*pi (ball).
  double angle_factor() const { return kind == DomainKind::Disk ? 2.0 * M_PI : 4.0 * M_PI; }
};

ModalDomain make_disk(int n_radial, int mode_cutoff, int n_boundary);
ModalDomain make_ball_radial(int n_radial);

/// Function on the domain as per-mode radial samples at the domain's radial nodes.
struct ModalField {
  int mode_lo = 0, mode_hi = 0; // inclusive
  std::vector<Vector> radial;   // radial[index_of(n) - offset]

  static ModalField zero(const ModalDomain& dom);
  Vector& mode(int n) { return radial[n - mode_lo]; }
  const Vector& mode(int n) const { return radial[n - mode_lo]; }
  bool has_mode(int n) const { return n >= mode_lo && n <= mode_hi; }
};

ModalField field_axpy(Complex a, const ModalField& x, const ModalField& y); // a*x + y
Complex inner_product(const ModalDomain& dom, const ModalField& f, const ModalField& g);

/// Radial factors of the mode-n resolvent kernel: `regular` solves the radial
/// equation and stays bounded at r=0, `matched` satisfies the r=1 boundary
/// condition. wronskian_norm = r^{d-1} W(regular, matched), an r-independent
/// constant that normalizes the kernel.
struct RadialSolutionPair {
  int mode = 0;
  std::vector<double> nodes;
  std::vector<Complex> regular, regular_deriv;
  std::vector<Complex> matched, matched_deriv;
  Complex regular_at_1{}, regular_deriv_at_1{};
  Complex matched_at_1{}, matched_deriv_at_1{};
  Complex wronskian_norm{};
  bool eigenvalue_flag = false; // |wronskian_norm| < 1e-12
};

RadialSolutionPair radial_solutions(const ModalDomain& dom, int mode, Bc bc,
                                    const SpectralPoint& z);
/// Same, sampled on caller-supplied nodes in (0, 1].
RadialSolutionPair radial_solutions_at(const ModalDomain& dom, int mode, Bc bc,
                                       const SpectralPoint& z, const std::vector<double>& nodes);

/// All radial machinery of (H0^bc - z)^{-1} for one spectral point.
/// `tail_weights[idx]` maps nodal samples of f to int_{r_i}^1 u2 f meas; the
/// matched branch is singular toward the origin, so these integrals use
/// panelwise Gauss rules with geometric subdivision instead of a global
/// polynomial interpolant.
struct ModalGreen {
  Bc bc = Bc::Dirichlet;
  SpectralPoint z{Complex(0, 0)};
  std::vector<RadialSolutionPair> per_mode; // indexed like ModalDomain modes
  std::vector<Matrix> tail_weights;
  bool any_eigenvalue_flag = false;

  const RadialSolutionPair& mode(const ModalDomain& dom, int n) const {
    return per_mode[dom.index_of(n)];
  }
};

ModalGreen make_modal_green(const ModalDomain& dom, Bc bc, const SpectralPoint& z);

struct KernelValue {
  Complex value{};
  bool truncation_flag = false; // last mode contributed > 1e-10 of the sum
};

/// Resolvent kernel G0^bc(z; x, x') at interior polar points; diagonal excluded.
KernelValue green_kernel(const ModalDomain& dom, Bc bc, const SpectralPoint& z, double r,
                         double theta, double rp, double thetap);

struct ModeValue {
  Complex value{};
  bool eigenvalue_flag = false;
};

/// Modal eigenvalue of the free Dirichlet-to-Neumann map, -u'(1)/u(1).
ModeValue free_dtn_mode(const ModalDomain& dom, int mode, const SpectralPoint& z);
/// Modal eigenvalue of the free Neumann-to-Dirichlet map, u(1)/u'(1) = -1/dtn.
ModeValue free_ntd_mode(const ModalDomain& dom, int mode, const SpectralPoint& z);

/// Free resolvent applied to a field, with its boundary traces. The modal
/// application is exact in angle. The kernel splits at its kink,
/// w = -[u2 int_0^r u1 f + u1 int_r^1 u2 f] / W; the first integrand is smooth
/// and uses the spectral integration operator, the second goes through the
/// precomputed tail weights.
struct GreenApplied {
  ModalField field;
  std::vector<Complex> dirichlet_trace; // per domain mode index: value at r=1
  std::vector<Complex> neumann_trace;   // per domain mode index: d/dr at r=1
};

GreenApplied apply_free_resolvent(const ModalDomain& dom, const ModalGreen& green,
                                  const ModalField& f);

/// Boundary-to-interior trace kernels: a_dirichlet = Neumann trace (first slot)
/// of the Dirichlet kernel, boundary x interior; b_neumann = Neumann kernel with
/// the second slot on the boundary, interior x boundary.
struct BoundaryTraceKernels {
  OperatorMatrix a_dirichlet; // (xi, x') -> d/dr|_{r_xi=1} G0^D(z; xi, x')
  OperatorMatrix b_neumann;   // (x, xi') -> G0^N(z; x, xi')
};

BoundaryTraceKernels boundary_trace_kernels(const ModalDomain& dom, const ModalGreen& green_d,
                                            const ModalGreen& green_n);

/// Helmholtz boundary value problem with modal boundary data; returns the
/// interior field and both traces per mode.
struct BvpSolution {
  ModalField field;
  std::vector<Complex> dirichlet_trace;
  std::vector<Complex> neumann_trace;
  bool eigenvalue_flag = false;
};

BvpSolution solve_helmholtz_bvp(const ModalDomain& dom, Bc bc,
                                const std::vector<Complex>& boundary_modes,
                                const SpectralPoint& z);

} // namespace detlab::geom
