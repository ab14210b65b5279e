#pragma once

#include <string>
#include <vector>

#include "ratelqg/lqr.hpp"

namespace rlqg {

// Optimum of the max-det program
//   min 1/2 log det Pi^-1 + 1/2 log det W
//   s.t. Tr(Theta P) + Tr(W S) <= gamma,  P <= A P A^T + W,
//        [[P - Pi, P A^T], [A P, A P A^T + W]] >= 0
// over P, Pi > 0. di_bits is the minimum directed information in bits per
// step for LQG cost budget gamma.
struct DiSolution {
  double gamma = 0.0;
  Mat P_opt;             // optimal stationary estimation-error covariance
  Mat Pi_opt;            // optimal Pi = (P^-1 + A^T W^-1 A)^-1
  double di_bits = 0.0;  // clamped below at 0
  Mat snr;               // P^-1 - (A P A^T + W)^-1, PSD
  int rank_r = 0;        // psd_rank(snr)
  // max of normalized stationarity, duality measure, and primal violation
  double kkt_residual = 0.0;
  int solver_iterations = 0;
  double budget_slack = 0.0;  // gamma - Tr(W S) - Tr(Theta P_opt)
  double budget_dual = 0.0;   // multiplier on the trace constraint
};

// Interior-point solve of the program above with Pi eliminated analytically
// (Pi = P - P A^T (A P A^T + W)^-1 A P). Requires gamma > Tr(W S); throws
// InfeasibleBudget otherwise, SolverFailure if the barrier iteration stalls
// above tolerance.
DiSolution solve_di(const PlantModel& model, const LqrCertainty& cert,
                    double gamma);

struct TradeoffPoint {
  double gamma = 0.0;
  double di_bits = 0.0;
  double upper_bits = 0.0;  // di_bits + (rank_r/2) log2(4 pi e / 12) + 1
  int rank_r = 0;
  bool ok = false;
  std::string error;
};

// Evaluates solve_di over an ascending gamma grid. Points run under OpenMP
// when parallel is set; the serial path is kept as the reference and both
// produce identical results. Failed points carry ok=false and the message.
std::vector<TradeoffPoint> tradeoff_curve(const PlantModel& model,
                                          const LqrCertainty& cert,
                                          const std::vector<double>& gammas,
                                          bool parallel = true);

}  // namespace rlqg
