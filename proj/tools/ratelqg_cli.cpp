#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ratelqg/codec.hpp"
#include "ratelqg/di_sdp.hpp"
#include "ratelqg/errors.hpp"
#include "ratelqg/lqr.hpp"
#include "ratelqg/model_io.hpp"
#include "ratelqg/quantizer.hpp"
#include "ratelqg/rng.hpp"
#include "ratelqg/sensor.hpp"
#include "ratelqg/sim_loop.hpp"
#include "ratelqg/validation.hpp"

namespace {

using namespace rlqg;

constexpr int kExitUsage = 2;
constexpr int kExitModel = 3;
constexpr int kExitSolver = 4;
constexpr int kExitSimulation = 5;
constexpr int kExitBoundViolation = 6;

void print_matrix(std::ostream& out, const std::string& name, const Mat& m) {
  out << name << "\n";
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << fmt_double(m(i, j));
    }
    out << "\n";
  }
}

void print_kv(std::ostream& out, const std::string& key, double v) {
  out << key << ' ' << fmt_double(v) << "\n";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot open '" + path + "' for writing", 0);
  return f;
}

int cmd_lqr(const std::string& model_path) {
  const PlantModel model = parse_model(model_path);
  const LqrCertainty cert = solve_dare(model);
  std::ostream& out = std::cout;
  out << "n " << model.n() << "\n";
  out << "m " << model.m() << "\n";
  print_matrix(out, "S", cert.S);
  print_matrix(out, "K", cert.K);
  print_matrix(out, "Theta", cert.Theta);
  print_kv(out, "min_cost", min_cost(model, cert));
  print_kv(out, "dare_residual", cert.residual);
  print_kv(out, "closed_loop_radius",
           spectral_radius(model.A + model.B * cert.K));
  return 0;
}

int cmd_di(const std::string& model_path, double gamma) {
  const PlantModel model = parse_model(model_path);
  const LqrCertainty cert = solve_dare(model);
  const DiSolution sol = solve_di(model, cert, gamma);
  std::ostream& out = std::cout;
  print_kv(out, "gamma", gamma);
  print_kv(out, "tr_ws", min_cost(model, cert));
  print_kv(out, "di_bits", sol.di_bits);
  out << "rank_r " << sol.rank_r << "\n";
  print_kv(out, "kkt_residual", sol.kkt_residual);
  print_kv(out, "budget_slack", sol.budget_slack);
  print_kv(out, "budget_dual", sol.budget_dual);
  out << "iterations " << sol.solver_iterations << "\n";
  print_matrix(out, "P_opt", sol.P_opt);
  print_matrix(out, "Pi_opt", sol.Pi_opt);
  print_matrix(out, "snr", sol.snr);
  return 0;
}

int cmd_tradeoff(const std::string& model_path, double gamma_min,
                 double gamma_max, int points, bool linear, bool serial,
                 const std::string& out_path) {
  if (points < 1) throw ParseError("--points must be at least 1", 0);
  if (!(gamma_min > 0.0) || gamma_max < gamma_min)
    throw ParseError("need 0 < gamma-min <= gamma-max", 0);
  const PlantModel model = parse_model(model_path);
  const LqrCertainty cert = solve_dare(model);
  const double tr_ws = min_cost(model, cert);
  if (!(gamma_min > tr_ws))
    throw InfeasibleBudget("gamma-min = " + fmt_double(gamma_min) +
                           " does not exceed Tr(W S) = " + fmt_double(tr_ws));

  std::vector<double> gammas;
  gammas.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double f = points == 1
                         ? 0.0
                         : static_cast<double>(i) /
                               static_cast<double>(points - 1);
    gammas.push_back(linear
                         ? gamma_min + f * (gamma_max - gamma_min)
                         : std::exp(std::log(gamma_min) +
                                    f * (std::log(gamma_max) -
                                         std::log(gamma_min))));
  }
  const auto curve = tradeoff_curve(model, cert, gammas, !serial);

  std::ostringstream csv;
  csv << "gamma,di_bits,upper_bits,rank_r\n";
  int failures = 0;
  for (const TradeoffPoint& pt : curve) {
    if (pt.ok) {
      csv << fmt_double(pt.gamma) << ',' << fmt_double(pt.di_bits) << ','
          << fmt_double(pt.upper_bits) << ',' << pt.rank_r << "\n";
    } else {
      csv << fmt_double(pt.gamma) << ",nan,nan,-1\n";
      ++failures;
    }
  }
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    open_out(out_path) << csv.str();
  }
  if (failures == points)
    throw SolverFailure("every grid point failed");
  return 0;
}

int cmd_synthesize(const std::string& model_path, double gamma,
                   const std::string& out_path) {
  const PlantModel model = parse_model(model_path);
  const LoopSynthesis syn = synthesize(model, gamma);
  if (!syn.transmits)
    throw ZeroRank("optimal SNR matrix has rank zero; no sensor to "
                   "synthesize at this budget");
  if (out_path.empty()) {
    std::cout << format_design(syn);
  } else {
    write_design(out_path, syn);
    std::cout << "design written to " << out_path << "\n";
    print_kv(std::cout, "di_bits", syn.sol.di_bits);
    std::cout << "rank_r " << syn.sensor.r << "\n";
    print_kv(std::cout, "realized_di_bits", syn.kalman.innovation_bits);
    print_kv(std::cout, "filter_vs_sdp_error", syn.filt_vs_sdp_error);
  }
  return 0;
}

void print_summary(std::ostream& out, const SimulationSummary& s) {
  out << "steps " << s.steps << "\n";
  out << "trials " << s.trials << "\n";
  out << "samples " << s.samples << "\n";
  out << "transmits " << (s.transmits ? 1 : 0) << "\n";
  print_kv(out, "avg_cost", s.avg_cost);
  print_kv(out, "avg_rate_bits", s.avg_rate_bits);
  print_kv(out, "avg_rate_data_bits", s.avg_rate_data_bits);
  print_kv(out, "di_bits", s.di_bits);
  print_kv(out, "upper_bits", s.upper_bits);
  print_kv(out, "cost_ci", s.cost_ci_halfwidth);
  print_kv(out, "rate_ci", s.rate_ci_halfwidth);
  print_kv(out, "stationary_cov_error", s.stationary_cov_error);
  print_kv(out, "decoder_divergence", s.decoder_divergence);
}

// Per-step audit of trial 0, reproducing the simulator's streams.
void write_trace(const std::string& path, const PlantModel& model,
                 const LoopSynthesis& syn, std::uint64_t seed,
                 long long rows) {
  std::ofstream out = open_out(path);
  out << "step,bits,hex\n";
  const Mat w_sqrt = psd_sqrt(SymMatrix(model.W));
  const Mat x0_sqrt = psd_sqrt(SymMatrix(model.P_prior));
  const CounterRng process(seed, kStreamProcess, 0);
  const CounterRng init(seed, kStreamInit, 0);
  const int n = model.n();

  Vec z(n);
  for (int i = 0; i < n; ++i)
    z[i] = init.gaussian(0, static_cast<std::uint64_t>(i));
  LoopState st;
  st.x = x0_sqrt * z;
  st.xhat_pred = Vec::Zero(n);

  std::unique_ptr<DitherStream> dither;
  std::unique_ptr<CodecSession> codec;
  if (syn.transmits) {
    dither = std::make_unique<DitherStream>(seed, syn.sensor.Delta, 0);
    codec = std::make_unique<CodecSession>(innovation_variances(syn),
                                           syn.sensor.Delta);
  }
  BitWriter bits;
  for (long long t = 0; t < rows; ++t) {
    for (int i = 0; i < n; ++i)
      z[i] = process.gaussian(static_cast<std::uint64_t>(t),
                              static_cast<std::uint64_t>(i));
    bits.clear();
    const Vec xi = syn.transmits ? dither->next() : Vec();
    const StepRecord rec =
        loop_step(model, syn, st, xi, w_sqrt * z, codec.get(), &bits);
    out << t << ',' << (syn.transmits ? rec.bits : 1) << ','
        << bits_to_hex(bits.bits()) << "\n";
  }
}

int cmd_simulate(const std::string& model_path, double gamma,
                 long long steps, int trials, std::uint64_t seed, bool serial,
                 const std::string& out_path, const std::string& trace_path) {
  const PlantModel model = parse_model(model_path);
  const LoopSynthesis syn = synthesize(model, gamma);
  SimOptions opt;
  opt.steps = steps;
  opt.trials = trials;
  opt.seed = seed;
  opt.parallel = !serial;
  const SimulationSummary s = simulate(model, syn, opt);
  print_summary(std::cout, s);
  if (!out_path.empty()) {
    std::ofstream f = open_out(out_path);
    f << "steps,trials,samples,transmits,avg_cost,avg_rate_bits,"
         "avg_rate_data_bits,di_bits,upper_bits,cost_ci,rate_ci,"
         "stationary_cov_error,decoder_divergence\n";
    f << s.steps << ',' << s.trials << ',' << s.samples << ','
      << (s.transmits ? 1 : 0) << ',' << fmt_double(s.avg_cost) << ','
      << fmt_double(s.avg_rate_bits) << ','
      << fmt_double(s.avg_rate_data_bits) << ',' << fmt_double(s.di_bits)
      << ',' << fmt_double(s.upper_bits) << ','
      << fmt_double(s.cost_ci_halfwidth) << ','
      << fmt_double(s.rate_ci_halfwidth) << ','
      << fmt_double(s.stationary_cov_error) << ','
      << fmt_double(s.decoder_divergence) << "\n";
  }
  if (!trace_path.empty())
    write_trace(trace_path, model, syn, seed, std::min<long long>(steps, 2000));
  return 0;
}

int cmd_verify(const std::string& model_path, double gamma, long long steps,
               int trials, std::uint64_t seed, bool serial,
               const std::string& out_path, double wire_delta_scale) {
  const PlantModel model = parse_model(model_path);
  LoopSynthesis syn = synthesize(model, gamma);
  if (wire_delta_scale != 1.0 && syn.transmits)
    syn.sensor.Delta *= wire_delta_scale;

  SimOptions opt;
  opt.steps = steps;
  opt.trials = trials;
  opt.seed = seed;
  opt.parallel = !serial;
  const SimulationSummary s = simulate(model, syn, opt);

  GapReport gap;
  if (syn.transmits)
    gap = gap_report(innovation_variances(syn), syn.sensor.Delta);

  const double cost_limit = 1.05 * gamma;
  const double rate_lower = s.di_bits - s.rate_ci_halfwidth;
  const double rate_upper = s.upper_bits + s.rate_ci_halfwidth;
  const bool cost_ok = s.avg_cost <= cost_limit;
  const bool rate_lo_ok = s.avg_rate_data_bits >= rate_lower;
  const bool rate_hi_ok = s.avg_rate_data_bits < rate_upper;
  const bool all_ok = cost_ok && rate_lo_ok && rate_hi_ok;

  std::ostream& out = std::cout;
  print_kv(out, "gamma", gamma);
  print_kv(out, "tr_ws", min_cost(model, syn.cert));
  print_kv(out, "di_bits", s.di_bits);
  out << "rank_r " << (syn.transmits ? syn.sensor.r : 0) << "\n";
  print_kv(out, "cap_gap_bits",
           capacity_gap_bound(syn.transmits ? syn.sensor.r : 0));
  print_kv(out, "upper_bits", s.upper_bits);
  out << "steps " << steps << "\n";
  out << "trials " << trials << "\n";
  out << "seed " << seed << "\n";
  print_kv(out, "avg_cost", s.avg_cost);
  print_kv(out, "cost_limit", cost_limit);
  print_kv(out, "avg_rate_bits", s.avg_rate_bits);
  print_kv(out, "avg_rate_data_bits", s.avg_rate_data_bits);
  print_kv(out, "rate_lower_limit", rate_lower);
  print_kv(out, "rate_upper_limit", rate_upper);
  print_kv(out, "cost_ci", s.cost_ci_halfwidth);
  print_kv(out, "rate_ci", s.rate_ci_halfwidth);
  print_kv(out, "moment_error", s.stationary_cov_error);
  print_kv(out, "decoder_divergence", s.decoder_divergence);
  print_kv(out, "rdf_bits", gap.rdf_bits);
  print_kv(out, "channel_bits", gap.entropy_bits);
  print_kv(out, "channel_gap_slack", gap.slack);
  out << "check cost_within_budget " << (cost_ok ? "PASS" : "FAIL") << "\n";
  out << "check rate_above_di " << (rate_lo_ok ? "PASS" : "FAIL") << "\n";
  out << "check rate_below_upper " << (rate_hi_ok ? "PASS" : "FAIL") << "\n";
  out << "verdict " << (all_ok ? "PASS" : "FAIL") << "\n";

  if (!out_path.empty()) {
    std::ofstream f = open_out(out_path);
    f << "gamma,di_bits,rank_r,upper_bits,avg_cost,avg_rate_data_bits,"
         "cost_ci,rate_ci,moment_error,verdict\n";
    f << fmt_double(gamma) << ',' << fmt_double(s.di_bits) << ','
      << (syn.transmits ? syn.sensor.r : 0) << ','
      << fmt_double(s.upper_bits) << ',' << fmt_double(s.avg_cost) << ','
      << fmt_double(s.avg_rate_data_bits) << ','
      << fmt_double(s.cost_ci_halfwidth) << ','
      << fmt_double(s.rate_ci_halfwidth) << ','
      << fmt_double(s.stationary_cov_error) << ','
      << (all_ok ? "PASS" : "FAIL") << "\n";
  }
  return all_ok ? 0 : kExitBoundViolation;
}

int classify(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return kExitUsage;
  if (dynamic_cast<const InfeasibleBudget*>(&e) ||
      dynamic_cast<const SolverFailure*>(&e) ||
      dynamic_cast<const ZeroRank*>(&e))
    return kExitSolver;
  if (dynamic_cast<const NumericalDivergence*>(&e) ||
      dynamic_cast<const InsufficientSamples*>(&e) ||
      dynamic_cast<const DecodeFailure*>(&e) ||
      dynamic_cast<const QuadratureFailure*>(&e))
    return kExitSimulation;
  if (dynamic_cast<const Error*>(&e)) return kExitModel;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rate-limited LQG control toolkit"};
  app.require_subcommand(1);

  std::string model_path;
  std::string out_path;
  std::string trace_path;
  double gamma = 0.0;
  double gamma_min = 0.0;
  double gamma_max = 0.0;
  int points = 25;
  bool linear = false;
  bool serial = false;
  long long steps = 200000;
  int trials = 4;
  std::uint64_t seed = 0;
  double wire_delta_scale = 1.0;

  auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("model", model_path, "plant description file")
        ->required();
  };
  auto add_gamma = [&](CLI::App* cmd) {
    cmd->add_option("--gamma", gamma, "LQG cost budget")->required();
  };
  auto add_sim = [&](CLI::App* cmd) {
    cmd->add_option("--steps", steps, "steps per trial (burn-in included)");
    cmd->add_option("--trials", trials, "independent trials");
    cmd->add_option("--seed", seed, "base seed");
    cmd->add_flag("--serial", serial, "disable OpenMP over trials");
  };

  auto* lqr = app.add_subcommand("lqr", "certainty-equivalent LQR gains");
  add_model(lqr);

  auto* di = app.add_subcommand(
      "di", "minimum directed-information rate for one budget");
  add_model(di);
  add_gamma(di);

  auto* tradeoff = app.add_subcommand(
      "tradeoff", "rate-cost curve over a budget grid");
  add_model(tradeoff);
  tradeoff->add_option("--gamma-min", gamma_min, "smallest budget")
      ->required();
  tradeoff->add_option("--gamma-max", gamma_max, "largest budget")
      ->required();
  tradeoff->add_option("--points", points, "grid size");
  tradeoff->add_flag("--linear", linear,
                     "linear spacing instead of logarithmic");
  tradeoff->add_flag("--serial", serial, "disable OpenMP over grid points");
  tradeoff->add_option("--out", out_path, "CSV destination");

  auto* synth = app.add_subcommand(
      "synthesize", "quantizer, coder and filter realization");
  add_model(synth);
  add_gamma(synth);
  synth->add_option("--out", out_path, "design file destination");

  auto* sim = app.add_subcommand("simulate", "closed-loop Monte Carlo run");
  add_model(sim);
  add_gamma(sim);
  add_sim(sim);
  sim->add_option("--out", out_path, "summary CSV destination");
  sim->add_option("--trace", trace_path, "per-step bitstream audit CSV");

  auto* verify = app.add_subcommand(
      "verify", "check achieved rate against the information bounds");
  add_model(verify);
  add_gamma(verify);
  add_sim(verify);
  verify->add_option("--out", out_path, "verdict CSV destination");
  verify->add_option("--wire-delta-scale", wire_delta_scale)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (lqr->parsed()) return cmd_lqr(model_path);
    if (di->parsed()) return cmd_di(model_path, gamma);
    if (tradeoff->parsed())
      return cmd_tradeoff(model_path, gamma_min, gamma_max, points, linear,
                          serial, out_path);
    if (synth->parsed()) return cmd_synthesize(model_path, gamma, out_path);
    if (sim->parsed())
      return cmd_simulate(model_path, gamma, steps, trials, seed, serial,
                          out_path, trace_path);
    if (verify->parsed())
      return cmd_verify(model_path, gamma, steps, trials, seed, serial,
                        out_path, wire_delta_scale);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  }
  return kExitUsage;
}
