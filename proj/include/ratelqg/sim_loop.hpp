#pragma once

#include <cstdint>
#include <vector>

#include "ratelqg/codec.hpp"
#include "ratelqg/quantizer.hpp"
#include "ratelqg/sensor.hpp"

namespace rlqg {

struct LoopState {
  Vec x;
  Vec xhat_pred;
};

struct StepRecord {
  Vec theta;  // empty when the design does not transmit
  std::vector<std::int64_t> cells;
  Vec q;
  Vec xhat;
  Vec u;
  int bits = 0;
  double cost = 0.0;  // x_next' Q x_next + u' R u
};

// Innovation variances (C P_pred C')_ii used to build coding pmfs.
Vec innovation_variances(const LoopSynthesis& syn);

// One closed-loop transition with explicit noise inputs. xi must have the
// sensor's component count (ignored when the design does not transmit);
// codec may be null to skip entropy coding (bits = 0).
StepRecord loop_step(const PlantModel& model, const LoopSynthesis& syn,
                     LoopState& st, const Vec& xi, const Vec& w,
                     CodecSession* codec, BitWriter* bits_out);

struct SimOptions {
  long long steps = 200000;  // total per trial, burn-in included
  int trials = 4;
  std::uint64_t seed = 0;
  long long burn_in = 1000;
  int batch_length = 100;
  bool parallel = true;
  // Run an independent decoder session per trial and track the worst
  // difference between its state estimate and the encoder's.
  bool check_decoder = true;
};

struct SimulationSummary {
  long long steps = 0;
  int trials = 0;
  long long samples = 0;  // post-burn-in steps across trials
  bool transmits = true;
  double avg_cost = 0.0;
  double avg_rate_bits = 0.0;       // bits on the wire per step
  double avg_rate_data_bits = 0.0;  // excludes the no-transmission keepalive
  double di_bits = 0.0;
  double upper_bits = 0.0;
  double cost_ci_halfwidth = 0.0;
  double rate_ci_halfwidth = 0.0;
  double stationary_cov_error = 0.0;  // relative Frobenius vs analytic
  double decoder_divergence = 0.0;    // max |xhat_enc - xhat_dec|, expect 0
  Vec emp_mean_x;
  Mat emp_cov_x;
};

// Monte Carlo closed-loop run. Trials use disjoint counter-RNG streams, so
// results are identical whether trials run serially or under OpenMP.
SimulationSummary simulate(const PlantModel& model, const LoopSynthesis& syn,
                           const SimOptions& opt);

// Stationary second moments of the coded loop from the joint recursion on
// (xhat_pred, x - xhat_pred).
struct LoopMoments {
  Mat cov_z;  // joint covariance of (xhat_pred, prediction error)
  Mat cov_x;
  Mat cov_u;
  double cost = 0.0;           // Tr(Q cov_x) + Tr(R cov_u)
  double cost_identity = 0.0;  // Tr(Theta P_filt) + Tr(W S)
};

LoopMoments analytic_loop_covariance(const PlantModel& model,
                                     const LoopSynthesis& syn);

}  // namespace rlqg
