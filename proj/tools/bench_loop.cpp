#include <cmath>
#include <cstdio>
#include <vector>

#include <omp.h>

#include "ratelqg/di_sdp.hpp"
#include "ratelqg/lqr.hpp"
#include "ratelqg/sensor.hpp"
#include "ratelqg/sim_loop.hpp"

using namespace rlqg;

namespace {

PlantModel demo_model() {
  PlantModel m;
  m.A = Mat{{1.1, 0.2}, {0.0, 0.8}};
  m.B = Mat::Identity(2, 2);
  m.W = Mat::Identity(2, 2);
  m.Q = Mat::Identity(2, 2);
  m.R = Mat::Identity(2, 2);
  m.P_prior = Mat::Identity(2, 2);
  return m;
}

bool summaries_match(const SimulationSummary& a, const SimulationSummary& b) {
  return a.avg_cost == b.avg_cost && a.avg_rate_bits == b.avg_rate_bits &&
         a.cost_ci_halfwidth == b.cost_ci_halfwidth &&
         a.rate_ci_halfwidth == b.rate_ci_halfwidth &&
         (a.emp_cov_x - b.emp_cov_x).norm() == 0.0;
}

}  // namespace

int main() {
  const PlantModel model = demo_model();
  const LqrCertainty cert = solve_dare(model);
  const double tr_ws = min_cost(model, cert);
  const double gamma = 2.0 * tr_ws;
  const LoopSynthesis syn = synthesize(model, gamma);

  std::printf("threads %d\n", omp_get_max_threads());

  SimOptions opt;
  opt.steps = 50000;
  opt.trials = 8;
  opt.parallel = false;
  double t0 = omp_get_wtime();
  const SimulationSummary serial = simulate(model, syn, opt);
  const double sim_serial = omp_get_wtime() - t0;

  opt.parallel = true;
  t0 = omp_get_wtime();
  const SimulationSummary parallel = simulate(model, syn, opt);
  const double sim_parallel = omp_get_wtime() - t0;

  std::printf("simulate  serial %.3fs  parallel %.3fs  speedup %.2fx  %s\n",
              sim_serial, sim_parallel, sim_serial / sim_parallel,
              summaries_match(serial, parallel) ? "identical" : "MISMATCH");

  std::vector<double> gammas;
  for (int i = 0; i < 16; ++i)
    gammas.push_back(tr_ws * (1.2 + 0.35 * i));
  t0 = omp_get_wtime();
  const auto curve_serial = tradeoff_curve(model, cert, gammas, false);
  const double curve_serial_s = omp_get_wtime() - t0;
  t0 = omp_get_wtime();
  const auto curve_parallel = tradeoff_curve(model, cert, gammas, true);
  const double curve_parallel_s = omp_get_wtime() - t0;

  bool same = true;
  for (std::size_t i = 0; i < gammas.size(); ++i)
    same = same &&
           curve_serial[i].di_bits == curve_parallel[i].di_bits &&
           curve_serial[i].rank_r == curve_parallel[i].rank_r;
  std::printf("tradeoff  serial %.3fs  parallel %.3fs  speedup %.2fx  %s\n",
              curve_serial_s, curve_parallel_s,
              curve_serial_s / curve_parallel_s,
              same ? "identical" : "MISMATCH");

  const bool ok = summaries_match(serial, parallel) && same;
  return ok ? 0 : 1;
}
