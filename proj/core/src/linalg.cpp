#include "detlab/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace detlab {

DetResult det_I_plus(const Matrix& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("det_I_plus: matrix must be square");
  DetResult res;
  if (A.rows() == 0) {
    res.value = Complex(1.0, 0.0);
    return res;
  }
  Matrix M = Matrix::Identity(A.rows(), A.cols()) + A;
  Eigen::PartialPivLU<Matrix> lu(M);
  const auto& diag = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (diag(i) == Complex(0.0, 0.0)) {
      res.zero_pivot = true;
      res.value = Complex(0.0, 0.0);
      return res;
    }
  }
  res.value = lu.determinant();
  return res;
}

SolveResult solve_I_plus(const Matrix& A, const Vector& b, double cond_threshold) {
  if (A.rows() != A.cols()) throw std::invalid_argument("solve_I_plus: matrix must be square");
  if (A.rows() != b.size()) throw std::invalid_argument("solve_I_plus: dimension mismatch");
  Matrix M = Matrix::Identity(A.rows(), A.cols()) + A;
  Eigen::PartialPivLU<Matrix> lu(M);

  double pmax = 0.0, pmin = std::numeric_limits<double>::infinity();
  const auto& diag = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    double p = std::abs(diag(i));
    pmax = std::max(pmax, p);
    pmin = std::min(pmin, p);
  }

  SolveResult res;
  res.condition_estimate = (pmin > 0.0) ? pmax / pmin : std::numeric_limits<double>::infinity();
  res.near_singular = !(res.condition_estimate < cond_threshold);
  res.x = lu.solve(b);
  return res;
}

Matrix weight_symmetrize(const Matrix& kernel_values, const std::vector<double>& w_row,
                         const std::vector<double>& w_col) {
  if (kernel_values.rows() != static_cast<Eigen::Index>(w_row.size()) ||
      kernel_values.cols() != static_cast<Eigen::Index>(w_col.size()))
    throw std::invalid_argument("weight_symmetrize: grid/matrix size mismatch");
  Matrix M = kernel_values;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    const double si = std::sqrt(w_row[i]);
    for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) *= si * std::sqrt(w_col[j]);
  }
  return M;
}

RealVector singular_values(const Matrix& A) {
  Eigen::JacobiSVD<Matrix> svd(A);
  return svd.singularValues();
}

} // namespace detlab
