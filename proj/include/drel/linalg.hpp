#pragma once

#include <Eigen/Dense>

namespace drel::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Eigenpairs of a symmetric matrix, eigenvalues in non-increasing order and
// eigenvectors in the matching columns.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

/// Householder tridiagonalisation followed by implicit QL. Deterministic;
/// intended for the small dense matrices used here (m <= a few hundred).
/// Only the lower triangle of `a` is read.
SymmetricEigen symmetric_eigen(const Matrix& a);

/// Flips each column so that its largest-magnitude entry is non-negative
/// (ties resolved by the lowest row index).
void canonicalize_signs(Matrix& vectors);

/// Max-abs entry of a - b.
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace drel::linalg
