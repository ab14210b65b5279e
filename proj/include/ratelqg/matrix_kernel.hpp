#pragma once

#include <Eigen/Dense>

#include "ratelqg/errors.hpp"

namespace rlqg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Square real matrix stored exactly symmetric: construction replaces the
// input with (M + M^T)/2, so entries(i,j) == entries(j,i) bit-for-bit.
class SymMatrix {
 public:
  explicit SymMatrix(const Mat& m);
  static SymMatrix diag(const Vec& d);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Mat& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Mat m_;
};

struct EigSym {
  Vec values;   // sorted descending
  Mat vectors;  // columns are the matching eigenvectors, orthonormal
};

// Base-2 log-determinant of an SPD matrix via Cholesky pivots.
// Throws NotPositiveDefinite on a nonpositive pivot.
double logdet_spd(const SymMatrix& m);

// Symmetric eigendecomposition by cyclic Jacobi rotations (dim <= 8 scale).
// Satisfies M = U diag(values) U^T; throws ConvergenceFailure past the
// sweep cap.
EigSym eig_sym(const SymMatrix& m);

// Number of eigenvalues above tol*max(1, lambda_max). Throws NotPSD if any
// eigenvalue falls below -tol*max(1, |lambda_max|).
int psd_rank(const SymMatrix& m, double tol = 1e-9);

// Symmetric square root U diag(sqrt(max(lambda, 0))) U^T.
Mat psd_sqrt(const SymMatrix& m);

}  // namespace rlqg
