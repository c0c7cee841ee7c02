#pragma once

#include "detlab/quadrature.hpp"
#include "detlab/types.hpp"

namespace detlab {

/// Dense matrix section of an integral operator together with the quadrature
/// grids it was sampled on. `weight_symmetrized` marks entries that already
/// absorb sqrt(w_row) * kernel * sqrt(w_col).
struct OperatorMatrix {
  Matrix entries;
  QuadratureGrid row_grid;
  QuadratureGrid col_grid;
  bool weight_symmetrized = false;
};

struct DetResult {
  Complex value{};
  bool zero_pivot = false; // a pivot underflowed to exact zero; value reported as 0
};

/// det(I + A) by partial-pivoted LU. Deterministic for fixed input.
DetResult det_I_plus(const Matrix& A);

struct SolveResult {
  Vector x;
  double condition_estimate = 0.0; // pivot-ratio estimate, not a true condition number
  bool near_singular = false;
};

/// Solve (I + A) x = b. Flags near-singularity when the pivot-ratio estimate
/// exceeds `cond_threshold`.
SolveResult solve_I_plus(const Matrix& A, const Vector& b, double cond_threshold = 1e12);

/// Weight-symmetrized Nystrom section D A D with D = diag(sqrt(w)).
Matrix weight_symmetrize(const Matrix& kernel_values, const std::vector<double>& w_row,
                         const std::vector<double>& w_col);

/// Singular values, descending. (Used for numerical-rank and trace-norm checks.)
RealVector singular_values(const Matrix& A);

} // namespace detlab
