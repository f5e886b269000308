#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ionloc {

struct TridiagonalEigen {
  std::vector<double> values;  // ascending
  Eigen::MatrixXd vectors;     // column k belongs to values[k]
};

/// Full eigensystem of the real symmetric tridiagonal matrix with main
/// diagonal `diag` (size n) and off-diagonal `offdiag` (size n-1), by the
/// implicit-shift QL algorithm. Throws NumericalError naming the eigenvalue
/// index that failed to converge.
TridiagonalEigen solve_symmetric_tridiagonal(std::span<const double> diag,
                                             std::span<const double> offdiag);

}  // namespace ionloc
