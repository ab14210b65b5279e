#pragma once

#include "ratelqg/di_sdp.hpp"
#include "ratelqg/lqr.hpp"
#include "ratelqg/matrix_kernel.hpp"

namespace rlqg {

// Factorization snr = C' * diag(1/V) * C of the optimal signal-to-noise
// matrix: C has orthonormal rows (one per positive eigenvalue), V holds the
// matched dither error variances and Delta the quantizer steps sqrt(12 V).
struct SensorRealization {
  int r = 0;
  Mat C;
  Vec V_diag;
  Vec Delta;
};

// Rows follow the eigenvectors of snr in descending eigenvalue order; each
// row is signed so its first component above 1e-12 in magnitude is positive.
// Throws ZeroRank when no eigenvalue clears rank_tol (caller falls back to
// the no-transmission loop).
SensorRealization realize_sensor(const DiSolution& sol,
                                 double rank_tol = 1e-9);

struct KalmanGain {
  Mat P_pred;
  Mat P_filt;
  Mat L;
  double innovation_bits = 0.0;  // (1/2) log2 det(C P_pred C' + V) / det V
  int iterations = 0;
};

// Steady-state filter for y = C x + eta, eta ~ N-free uniform with
// covariance diag(V): fixed-point iteration of the Riccati update from W.
KalmanGain steady_kalman(const PlantModel& model,
                         const SensorRealization& sensor);

// Full design pass for one budget: certainty-equivalent gains, the
// rate-minimizing SDP, the sensor realization and its filter.
struct LoopSynthesis {
  LqrCertainty cert;
  DiSolution sol;
  bool transmits = false;  // false when the optimal SNR matrix is zero
  SensorRealization sensor;
  KalmanGain kalman;
  double filt_vs_sdp_error = 0.0;  // |P_filt - P_opt|_F / |P_opt|_F
};

LoopSynthesis synthesize(const PlantModel& model, double gamma);

}  // namespace rlqg
