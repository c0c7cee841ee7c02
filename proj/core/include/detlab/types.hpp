#pragma once

#include <complex>

#include <Eigen/Core>

namespace detlab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr const char* kVersion = "0.1.0";

enum class Bc { Dirichlet, Neumann };

/// Relative deviation used throughout reports: |a-b| / max(|a|, 1).
inline double residual(Complex a, Complex b) {
  return std::abs(a - b) / std::max(std::abs(a), 1.0);
}

} // namespace detlab
