#ifndef MHECT_LINALG_H_
#define MHECT_LINALG_H_

#include <Eigen/Dense>

namespace mhect {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// |v|_M^2 = v' M v.
double WeightedSquaredNorm(const Vector& v, const Matrix& m);

// (M + M') / 2.
Matrix Symmetrize(const Matrix& m);

double MinEigenvalue(const Matrix& sym);
double MaxEigenvalue(const Matrix& sym);

// True if `sym` is symmetric (to `tol` relative) with minimum eigenvalue > 0.
bool IsSymmetricPositiveDefinite(const Matrix& sym, double tol = 1e-12);

// Largest lambda with det(a - lambda b) = 0, for symmetric a and SPD b.
// Computed as the largest eigenvalue of L^-1 a L^-T with b = L L'.
// Throws ConfigError if b is not positive definite.
double GeneralizedMaxEigenvalue(const Matrix& a, const Matrix& b);

// Upper-triangular U with m = U' U, so that |v|_m^2 = |U v|^2.
// Throws ConfigError if m is not positive definite.
Matrix CholeskyUpper(const Matrix& m);

}  // namespace mhect

#endif  // MHECT_LINALG_H_
