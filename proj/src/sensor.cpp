#include "ratelqg/sensor.hpp"

#include <cmath>

#include "ratelqg/errors.hpp"

namespace rlqg {

SensorRealization realize_sensor(const DiSolution& sol, double rank_tol) {
  const EigSym eig = eig_sym(SymMatrix(sol.snr));
  const int n = static_cast<int>(eig.values.size());
  const double scale = std::max(1.0, eig.values.size() ? eig.values[0] : 0.0);
  int r = 0;
  while (r < n && eig.values[r] > rank_tol * scale) ++r;
  if (r == 0) throw ZeroRank("realize_sensor: SNR matrix is numerically zero");

  SensorRealization out;
  out.r = r;
  out.C.resize(r, n);
  out.V_diag.resize(r);
  out.Delta.resize(r);
  for (int i = 0; i < r; ++i) {
    Vec row = eig.vectors.col(i);
    for (int j = 0; j < n; ++j) {
      if (std::abs(row[j]) > 1e-12) {
        if (row[j] < 0.0) row = -row;
        break;
      }
    }
    out.C.row(i) = row.transpose();
    out.V_diag[i] = 1.0 / eig.values[i];
    out.Delta[i] = std::sqrt(12.0 * out.V_diag[i]);
  }
  return out;
}

KalmanGain steady_kalman(const PlantModel& model,
                         const SensorRealization& sensor) {
  if (sensor.r < 1) throw ZeroRank("steady_kalman: sensor has rank zero");
  const Mat& A = model.A;
  const Mat& C = sensor.C;
  const Mat V = sensor.V_diag.asDiagonal();

  Mat P = model.W;
  constexpr int kMaxIterations = 100000;
  constexpr double kTol = 1e-12;
  int it = 0;
  for (; it < kMaxIterations; ++it) {
    const Mat S_y = C * P * C.transpose() + V;
    const Mat L = S_y.llt().solve(C * P).transpose();
    const Mat P_filt = P - L * C * P;
    Mat next = A * P_filt * A.transpose() + model.W;
    next = 0.5 * (next + next.transpose());
    const double res = (next - P).norm();
    P = next;
    if (res < kTol * std::max(1.0, P.norm())) break;
  }
  if (it == kMaxIterations)
    throw NoConvergence("steady_kalman: prediction covariance iteration did "
                        "not converge");

  KalmanGain out;
  out.P_pred = P;
  const Mat S_y = C * P * C.transpose() + V;
  out.L = S_y.llt().solve(C * P).transpose();
  Mat P_filt = P - out.L * C * P;
  out.P_filt = 0.5 * (P_filt + P_filt.transpose());
  double logdet_v = 0.0;
  for (int i = 0; i < sensor.r; ++i) logdet_v += std::log2(sensor.V_diag[i]);
  out.innovation_bits = 0.5 * (logdet_spd(SymMatrix(S_y)) - logdet_v);
  out.iterations = it + 1;
  return out;
}

LoopSynthesis synthesize(const PlantModel& model, double gamma) {
  LoopSynthesis syn;
  syn.cert = solve_dare(model);
  syn.sol = solve_di(model, syn.cert, gamma);
  try {
    syn.sensor = realize_sensor(syn.sol);
  } catch (const ZeroRank&) {
    syn.transmits = false;
    return syn;
  }
  syn.transmits = true;
  syn.kalman = steady_kalman(model, syn.sensor);
  syn.filt_vs_sdp_error =
      (syn.kalman.P_filt - syn.sol.P_opt).norm() /
      std::max(1e-300, syn.sol.P_opt.norm());
  return syn;
}

}  // namespace rlqg
