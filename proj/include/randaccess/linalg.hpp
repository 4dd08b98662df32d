#pragma once

#include <Eigen/Dense>

namespace randaccess {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns are the matching unit eigenvectors
};

bool is_symmetric(const Matrix& m, double rel_tol = 1e-9);

// Cyclic Jacobi rotations. Sweeps until the off-diagonal Frobenius mass falls
// below tol * max(1, ||m||_F). Throws std::invalid_argument on non-square or
// non-symmetric input.
SymmetricEigen symmetric_eigen(const Matrix& m, double tol = 1e-12);

double max_symmetric_eigenvalue(const Matrix& m, double tol = 1e-12);
double min_symmetric_eigenvalue(const Matrix& m, double tol = 1e-12);

// Factor F with F * F^T == m for a symmetric PSD m (tiny negative eigenvalues
// from round-off are clamped to zero).
Matrix psd_factor(const Matrix& m);

}  // namespace randaccess
