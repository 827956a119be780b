#include "mhect/linalg.h"

#include <cmath>

#include "mhect/errors.h"

namespace mhect {

double WeightedSquaredNorm(const Vector& v, const Matrix& m) {
  return v.dot(m * v);
}

Matrix Symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double MinEigenvalue(const Matrix& sym) {
  if (sym.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double MaxEigenvalue(const Matrix& sym) {
  if (sym.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

bool IsSymmetricPositiveDefinite(const Matrix& sym, double tol) {
  if (sym.rows() != sym.cols() || sym.rows() == 0) return false;
  const double scale = std::max(1.0, sym.cwiseAbs().maxCoeff());
  if ((sym - sym.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    return false;
  }
  return MinEigenvalue(Symmetrize(sym)) > 0.0;
}

double GeneralizedMaxEigenvalue(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw ConfigError("generalized eigenvalue: dimension mismatch");
  }
  Eigen::LLT<Matrix> llt(Symmetrize(b));
  if (llt.info() != Eigen::Success) {
    throw ConfigError("generalized eigenvalue: second matrix not positive "
                      "definite");
  }
  // L^-1 a L^-T via two triangular solves.
  Matrix tmp = llt.matrixL().solve(Symmetrize(a));
  Matrix c = llt.matrixL().solve(tmp.transpose());
  return MaxEigenvalue(Symmetrize(c));
}

Matrix CholeskyUpper(const Matrix& m) {
  Eigen::LLT<Matrix> llt(Symmetrize(m));
  if (llt.info() != Eigen::Success) {
    throw ConfigError("Cholesky factorization: matrix not positive definite");
  }
  return llt.matrixU();
}

}  // namespace mhect
