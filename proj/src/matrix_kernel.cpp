#include "ratelqg/matrix_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace rlqg {

SymMatrix::SymMatrix(const Mat& m) {
  if (m.rows() < 1 || m.rows() != m.cols())
    throw InvalidModel("SymMatrix requires a square matrix with dim >= 1");
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::diag(const Vec& d) {
  return SymMatrix(Mat(d.asDiagonal()));
}

double logdet_spd(const SymMatrix& m) {
  // Unblocked Cholesky; pivots feed the log sum directly so large
  // determinants cannot overflow.
  const int n = m.dim();
  Mat l = m.mat();
  double logdet2 = 0.0;
  for (int j = 0; j < n; ++j) {
    double d = l(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0))
      throw NotPositiveDefinite("Cholesky pivot " + std::to_string(j) +
                                " is not positive");
    const double piv = std::sqrt(d);
    l(j, j) = piv;
    for (int i = j + 1; i < n; ++i) {
      double s = l(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / piv;
    }
    logdet2 += 2.0 * std::log2(piv);
  }
  return logdet2;
}

EigSym eig_sym(const SymMatrix& m) {
  const int n = m.dim();
  Mat a = m.mat();
  Mat u = Mat::Identity(n, n);
  const double scale = std::max(a.norm(), 1e-300);

  constexpr int kMaxSweeps = 100;
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(off) <= 1e-15 * scale) {
      converged = true;
      break;
    }
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-18 * scale) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0)
                             ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                             : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double ukp = u(k, p), ukq = u(k, q);
          u(k, p) = c * ukp - s * ukq;
          u(k, q) = s * ukp + c * ukq;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }
  if (!converged) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(off) > 1e-12 * scale)
      throw ConvergenceFailure("Jacobi eigensolver exceeded sweep cap");
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a(i, i) > a(j, j); });
  EigSym out;
  out.values = Vec(n);
  out.vectors = Mat(n, n);
  for (int k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = u.col(order[k]);
  }
  return out;
}

Mat psd_sqrt(const SymMatrix& m) {
  const EigSym e = eig_sym(m);
  Vec root(m.dim());
  for (int i = 0; i < m.dim(); ++i)
    root(i) = std::sqrt(std::max(e.values(i), 0.0));
  return e.vectors * root.asDiagonal() * e.vectors.transpose();
}

int psd_rank(const SymMatrix& m, double tol) {
  const EigSym e = eig_sym(m);
  const double lmax = e.values(0);
  if (e.values(m.dim() - 1) < -tol * std::max(1.0, std::abs(lmax)))
    throw NotPSD("matrix has eigenvalue " +
                 std::to_string(e.values(m.dim() - 1)) + " below -tolerance");
  const double thresh = tol * std::max(1.0, lmax);
  int r = 0;
  for (int i = 0; i < m.dim(); ++i)
    if (e.values(i) > thresh) ++r;
  return r;
}

}  // namespace rlqg
