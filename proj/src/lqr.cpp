#include "ratelqg/lqr.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <string>

namespace rlqg {

namespace {

void require_spd(const Mat& m, const char* name) {
  if (m.rows() != m.cols())
    throw InvalidModel(std::string(name) + " must be square");
  try {
    logdet_spd(SymMatrix(m));
  } catch (const NotPositiveDefinite&) {
    throw InvalidModel(std::string(name) + " is not positive definite");
  }
}

// Rank of a complex matrix at the PBH tolerance.
int complex_rank(const Eigen::MatrixXcd& m, double tol) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(m);
  qr.setThreshold(tol);
  return static_cast<int>(qr.rank());
}

}  // namespace

void PlantModel::validate() const {
  const int nn = n(), mm = m();
  if (nn < 1 || A.cols() != nn) throw InvalidModel("A must be square, n >= 1");
  if (B.rows() != nn || mm < 1) throw InvalidModel("B must have n rows");
  if (W.rows() != nn || W.cols() != nn) throw InvalidModel("W must be n x n");
  if (Q.rows() != nn || Q.cols() != nn) throw InvalidModel("Q must be n x n");
  if (R.rows() != mm || R.cols() != mm) throw InvalidModel("R must be m x m");
  if (P_prior.rows() != nn || P_prior.cols() != nn)
    throw InvalidModel("P0 must be n x n");
  require_spd(W, "W");
  require_spd(Q, "Q");
  require_spd(R, "R");
  require_spd(P_prior, "P0");

  // PBH rank tests at every unstable eigenvalue of A.
  constexpr double kPbhTol = 1e-8;
  Eigen::EigenSolver<Mat> es(A);
  for (int i = 0; i < nn; ++i) {
    const std::complex<double> lam = es.eigenvalues()(i);
    if (std::abs(lam) < 1.0 - kPbhTol) continue;
    Eigen::MatrixXcd stab(nn, nn + mm);
    stab << (A.cast<std::complex<double>>() -
             lam * Eigen::MatrixXcd::Identity(nn, nn)),
        B.cast<std::complex<double>>();
    if (complex_rank(stab, kPbhTol) < nn)
      throw NotStabilizable("(A,B) fails the PBH test at eigenvalue modulus " +
                            std::to_string(std::abs(lam)));
    Eigen::MatrixXcd det(2 * nn, nn);
    det << (A.cast<std::complex<double>>() -
            lam * Eigen::MatrixXcd::Identity(nn, nn)),
        Q.cast<std::complex<double>>();
    if (complex_rank(det, kPbhTol) < nn)
      throw NotDetectable("(A,Q) fails the PBH test at eigenvalue modulus " +
                          std::to_string(std::abs(lam)));
  }
}

namespace {

Mat dare_rhs(const PlantModel& mdl, const Mat& s) {
  const Mat bsb_r = mdl.B.transpose() * s * mdl.B + mdl.R;
  const Mat bsa = mdl.B.transpose() * s * mdl.A;
  return mdl.A.transpose() * s * mdl.A -
         bsa.transpose() * bsb_r.llt().solve(bsa) + mdl.Q;
}

}  // namespace

LqrCertainty solve_dare(const PlantModel& model) {
  model.validate();
  constexpr double kTol = 1e-12;
  constexpr int kMaxIter = 100000;

  Mat s = model.Q;
  double res = 0.0;
  bool done = false;
  for (int it = 0; it < kMaxIter; ++it) {
    const Mat next = dare_rhs(model, s);
    res = (next - s).norm();
    s = 0.5 * (next + next.transpose());
    if (res < kTol * std::max(1.0, s.norm())) {
      done = true;
      break;
    }
  }
  if (!done)
    throw NoConvergence("DARE fixed-point iteration did not reach tolerance");

  LqrCertainty cert;
  cert.S = s;
  const Mat bsb_r = model.B.transpose() * s * model.B + model.R;
  cert.K = -bsb_r.llt().solve(model.B.transpose() * s * model.A);
  cert.Theta = cert.K.transpose() * bsb_r * cert.K;
  cert.Theta = 0.5 * (cert.Theta + cert.Theta.transpose());
  cert.residual = (dare_rhs(model, s) - s).norm();

  const double rho = spectral_radius(model.A + model.B * cert.K);
  if (rho >= 1.0)
    throw NoConvergence("closed loop A+BK has spectral radius " +
                        std::to_string(rho));
  return cert;
}

double min_cost(const PlantModel& model, const LqrCertainty& cert) {
  return (model.W * cert.S).trace();
}

double spectral_radius(const Mat& m) {
  Eigen::EigenSolver<Mat> es(m, /*computeEigenvectors=*/false);
  double rho = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    rho = std::max(rho, std::abs(es.eigenvalues()(i)));
  return rho;
}

}  // namespace rlqg
