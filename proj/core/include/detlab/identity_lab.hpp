#pragma once

#include <string>
#include <vector>

#include "detlab/geometry.hpp"
#include "detlab/potential.hpp"
#include "detlab/rng.hpp"
#include "detlab/types.hpp"

namespace detlab::lab {

using geom::ModalDomain;
using geom::ModalField;
using geom::ModalGreen;
using pot::FiniteRankPotential;

/// Per-z record of computed determinants with pairwise residuals.
struct IdentityReport {
  SpectralPoint z{Complex(0, 0)};
  std::vector<std::pair<std::string, Complex>> quantities;
  std::vector<std::pair<std::string, double>> residuals;
  std::string resolution;
  std::vector<std::string> flags;
  bool excluded = false;

  double max_residual() const {
    double m = 0.0;
    for (const auto& [name, r] : residuals) m = std::max(m, r);
    return m;
  }
};

/// r x r reduction of the interior Birman-Schwinger operator at one spectral
/// point: matrix M_{jk} = kappa_k <phi_j, G0 psi_k> plus the applied fields and
/// their boundary traces, which every downstream identity reuses.
struct ReducedBs {
  Matrix m;                                  // r x r
  std::vector<geom::GreenApplied> applied;   // G0 psi_k per factor
  bool eigenvalue_flag = false;              // free-spectrum proximity
  Complex det{};                             // det(I_r + M)
  bool perturbed_flag = false;               // |det| < 1e-12
};

ReducedBs reduce_bs(const ModalDomain& dom, const ModalGreen& green,
                    const FiniteRankPotential& V);

struct DetValue {
  Complex value{};
  bool eigenvalue_flag = false;
};

/// det(I + u G0^bc(z) v) in the C^r reduction.
DetValue bs_det_interior(const ModalDomain& dom, Bc bc, const FiniteRankPotential& V,
                         const SpectralPoint& z);

/// Same determinant evaluated as a full-grid determinant on the polar product
/// grid (rank-structured assembly; equal to the reduction by the two-space
/// swap identity). Used as a cross-route check.
DetValue bs_det_interior_fullgrid(const ModalDomain& dom, Bc bc, const FiniteRankPotential& V,
                                  const SpectralPoint& z, int n_theta);

struct ResolventApplied {
  ModalField field;
  std::vector<Complex> dirichlet_trace; // per domain mode index
  std::vector<Complex> neumann_trace;
  bool eigenvalue_flag = false; // free spectrum
  bool perturbed_flag = false;  // det(I_r + M) below threshold
};

/// (H^bc - z)^{-1} f through the finite-rank Woodbury reduction.
ResolventApplied perturbed_resolvent_apply(const ModalDomain& dom, Bc bc,
                                           const FiniteRankPotential& V,
                                           const SpectralPoint& z, const ModalField& f);

enum class AssemblyRoute { DifferenceForm, ProductForm, ResolventTrace };

/// Boundary operator with an explicit identity part; the correction kernel has
/// rank <= r. Carried both as a boundary-grid kernel matrix and in the modal
/// basis.
struct BoundaryOperator {
  double identity_part = 0.0;
  OperatorMatrix correction;  // raw kernel values on the boundary grid
  Matrix modal_correction;    // n_modes x n_modes
  int rank_bound = 0;
  AssemblyRoute route = AssemblyRoute::ResolventTrace;
  bool eigenvalue_flag = false;

  /// det(identity_part * I + correction) in the modal basis.
  Complex modal_det() const;
};

/// The trace-class boundary operator whose determinant reproduces the interior
/// determinant ratio: kernel sum_j kappa_j a_j(xi) b_j(xi') with
/// a_j the Neumann trace of the perturbed Dirichlet resolvent applied to psi_j
/// and b_j the pairing of phi_j with the free Neumann kernel.
BoundaryOperator boundary_comparison_operator(const ModalDomain& dom,
                                             const FiniteRankPotential& V,
                                             const SpectralPoint& z);

struct DtnPerturbed {
  BoundaryOperator difference; // free DtN minus perturbed DtN
  BoundaryOperator ratio;      // perturbed DtN composed with the free inverse
  double reconciliation_residual = 0.0; // difference vs (I - ratio) * free DtN
  bool eigenvalue_flag = false;
};

/// Perturbed DtN map in both Lemma-style assemblies. The ratio operator's
/// modal matrix is built independently via per-mode boundary value solves.
DtnPerturbed dtn_perturbed(const ModalDomain& dom, const FiniteRankPotential& V,
                           const SpectralPoint& z);

/// Interior-ratio identity chain: interior determinant ratio, boundary
/// determinant, DtN-ratio determinant; pairwise residuals.
IdentityReport verify_determinant_chain(const ModalDomain& dom, const FiniteRankPotential& V,
                                const SpectralPoint& z);

/// Reciprocal chain with the Neumann comparison operator.
IdentityReport verify_reciprocal_chain(const ModalDomain& dom, const FiniteRankPotential& V,
                               const SpectralPoint& z);

/// Resolution of the full-grid Nystrom oracle: uniform radial nodes with
/// composite trapezoid weights, equispaced angles.
struct NystromParams {
  int n_radial = 48;
  int n_theta = 64;
  bool richardson = true; // extrapolate over radial steps h and 2h
};

/// Interior Birman-Schwinger determinant discretized on the polar product grid
/// with the mode-truncated kernel evaluated pointwise. For band-limited factors
/// the equispaced angular sums are exact, so the value is computed in the
/// mode-collapsed form; `nystrom_interior_det_dense` assembles the product-grid
/// matrix literally and must agree (tested at small sizes).
DetValue nystrom_interior_det(const ModalDomain& dom, Bc bc, const FiniteRankPotential& V,
                              const SpectralPoint& z, const NystromParams& p);

DetValue nystrom_interior_det_dense(const ModalDomain& dom, Bc bc,
                                    const FiniteRankPotential& V, const SpectralPoint& z,
                                    int n_radial, int n_theta);

struct SwapStats {
  int trials = 0;
  double max_rel_deviation = 0.0;
};

/// det(I - AB) vs det(I - BA) over randomized finite-rank trials.
SwapStats det_swap_property(int trials, std::uint64_t seed);

/// Perturbed Schrodinger boundary value problem u = u0 - (H - z)^{-1} V u0.
struct SchrodingerBvp {
  ModalField field;
  std::vector<Complex> dirichlet_trace;
  std::vector<Complex> neumann_trace;
  bool eigenvalue_flag = false;
};

SchrodingerBvp solve_schrodinger_bvp(const ModalDomain& dom, Bc bc,
                                     const FiniteRankPotential& V,
                                     const std::vector<Complex>& boundary_modes,
                                     const SpectralPoint& z);

} // namespace detlab::lab
