#pragma once

#include <utility>
#include <vector>

#include "detlab/geometry.hpp"
#include "detlab/types.hpp"

namespace detlab::pot {

using geom::ModalDomain;
using geom::ModalField;

/// Factor function given per azimuthal mode as radial polynomial coefficients
/// (lowest degree first), exactly evaluable on any radial grid.
struct FactorSpec {
  std::vector<std::pair<int, std::vector<Complex>>> modes;
};

ModalField sample_factor(const FactorSpec& spec, const ModalDomain& dom);
Vector sample_factor_mode(const FactorSpec& spec, int mode, const std::vector<double>& nodes);

/// Finite-rank nonlocal potential V f = sum_j kappa_j <phi_j, f> psi_j.
struct FiniteRankPotential {
  int rank = 0;
  std::vector<Complex> couplings;
  std::vector<FactorSpec> left_specs;  // psi_j (output directions)
  std::vector<FactorSpec> right_specs; // phi_j (pairing directions)
  std::vector<ModalField> left;        // samples on the domain grid
  std::vector<ModalField> right;
  double trace_norm = 0.0; // sum |kappa_j| ||psi_j|| ||phi_j||, >= trace-norm of V
  bool self_adjoint = false;
};

FiniteRankPotential make_potential(const std::vector<Complex>& couplings,
                                   const std::vector<FactorSpec>& left,
                                   const std::vector<FactorSpec>& right,
                                   const ModalDomain& dom);

ModalField apply(const FiniteRankPotential& V, const ModalField& f, const ModalDomain& dom);

/// Trace of V, sum_j kappa_j <phi_j, psi_j>.
Complex trace(const FiniteRankPotential& V, const ModalDomain& dom);

/// The C^r factorization V = v u: u collapses a field to pairing coordinates,
/// v synthesizes a field from coupled coordinates.
struct FactorPair {
  const FiniteRankPotential* potential = nullptr;
  const ModalDomain* domain = nullptr;

  Vector coordinates(const ModalField& f) const;   // (u f)_j = <phi_j, f>
  ModalField synthesize(const Vector& c) const;    // v c = sum_j kappa_j c_j psi_j
};

FactorPair factorize(const FiniteRankPotential& V, const ModalDomain& dom);

} // namespace detlab::pot
