#include "ratelqg/sim_loop.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "ratelqg/errors.hpp"
#include "ratelqg/rng.hpp"
#include "ratelqg/validation.hpp"

namespace rlqg {

namespace {

constexpr double kDivergenceLimit = 1e9;

// sum_k M^k cst (M^k)' by squaring: converges in O(log) terms when
// rho(M) < 1, diverges visibly otherwise.
Mat lyapunov_sum(Mat M, const Mat& cst) {
  Mat Z = cst;
  for (int it = 0; it < 200; ++it) {
    const Mat inc = M * Z * M.transpose();
    Mat next = Z + inc;
    next = 0.5 * (next + next.transpose());
    if (!next.allFinite() || next.norm() > 1e14)
      throw NoConvergence("analytic_loop_covariance: closed loop is not "
                          "stable");
    const bool done = inc.norm() <= 1e-14 * std::max(1.0, next.norm());
    Z = next;
    if (done) return Z;
    M = M * M;
  }
  throw NoConvergence("analytic_loop_covariance: covariance series did not "
                      "converge");
}

struct TrialStats {
  double sum_cost = 0.0;
  double sum_bits = 0.0;
  double sum_data_bits = 0.0;
  std::vector<double> cost_batches;
  std::vector<double> rate_batches;
  Vec sum_x;
  Mat sum_xx;
  long long n = 0;
  double decoder_div = 0.0;
  std::string error;
};

TrialStats run_trial(const PlantModel& model, const LoopSynthesis& syn,
                     const SimOptions& opt, int trial, const Mat& w_sqrt,
                     const Mat& x0_sqrt) {
  const int n = model.n();
  TrialStats ts;
  ts.sum_x = Vec::Zero(n);
  ts.sum_xx = Mat::Zero(n, n);

  const auto trial_u = static_cast<std::uint64_t>(trial);
  const CounterRng process(opt.seed, kStreamProcess, trial_u);
  const CounterRng init(opt.seed, kStreamInit, trial_u);

  Vec z(n);
  for (int i = 0; i < n; ++i) z[i] = init.gaussian(0, static_cast<std::uint64_t>(i));
  LoopState st;
  st.x = x0_sqrt * z;
  st.xhat_pred = Vec::Zero(n);

  const bool tx = syn.transmits;
  std::unique_ptr<DitherStream> dither;
  std::unique_ptr<DitherStream> dither_dec;
  std::unique_ptr<CodecSession> enc;
  std::unique_ptr<CodecSession> dec;
  Vec xhat_pred_dec;
  if (tx) {
    const Vec sigma2 = innovation_variances(syn);
    dither = std::make_unique<DitherStream>(opt.seed, syn.sensor.Delta,
                                            trial_u);
    enc = std::make_unique<CodecSession>(sigma2, syn.sensor.Delta);
    if (opt.check_decoder) {
      dither_dec = std::make_unique<DitherStream>(opt.seed, syn.sensor.Delta,
                                                  trial_u);
      dec = std::make_unique<CodecSession>(sigma2, syn.sensor.Delta);
      xhat_pred_dec = Vec::Zero(n);
    }
  }

  BitWriter bits;
  double batch_cost = 0.0;
  double batch_rate = 0.0;
  int batch_fill = 0;
  Vec w(n);
  for (long long t = 0; t < opt.steps; ++t) {
    const auto step_u = static_cast<std::uint64_t>(t);
    for (int i = 0; i < n; ++i)
      z[i] = process.gaussian(step_u, static_cast<std::uint64_t>(i));
    w = w_sqrt * z;

    bits.clear();
    const Vec xi = tx ? dither->next() : Vec();
    const StepRecord rec =
        loop_step(model, syn, st, xi, w, enc.get(), &bits);
    const double wire_bits = tx ? static_cast<double>(rec.bits) : 1.0;
    const double data_bits = tx ? static_cast<double>(rec.bits) : 0.0;

    if (tx && opt.check_decoder) {
      const Vec xi_dec = dither_dec->next();
      BitReader rd(bits.bits());
      const auto cells = dec->decode_step(rd, xi_dec);
      const Vec q = reconstruct_cells(cells, xi_dec, syn.sensor.Delta);
      const Vec xhat = xhat_pred_dec + syn.kalman.L * q;
      const Vec u = syn.cert.K * xhat;
      xhat_pred_dec = model.A * xhat + model.B * u;
      ts.decoder_div = std::max(
          ts.decoder_div, (xhat - rec.xhat).lpNorm<Eigen::Infinity>());
    }

    if (t >= opt.burn_in) {
      ts.sum_cost += rec.cost;
      ts.sum_bits += wire_bits;
      ts.sum_data_bits += data_bits;
      ts.sum_x += st.x;
      ts.sum_xx += st.x * st.x.transpose();
      ++ts.n;
      batch_cost += rec.cost;
      batch_rate += wire_bits;
      if (++batch_fill == opt.batch_length) {
        ts.cost_batches.push_back(batch_cost / opt.batch_length);
        ts.rate_batches.push_back(batch_rate / opt.batch_length);
        batch_cost = batch_rate = 0.0;
        batch_fill = 0;
      }
    }
  }
  return ts;
}

double sample_std(const std::vector<double>& v) {
  const auto n = static_cast<double>(v.size());
  double mean = 0.0;
  for (const double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace

Vec innovation_variances(const LoopSynthesis& syn) {
  if (!syn.transmits)
    throw ZeroRank("innovation_variances: design does not transmit");
  const Mat s = syn.sensor.C * syn.kalman.P_pred * syn.sensor.C.transpose();
  return s.diagonal();
}

StepRecord loop_step(const PlantModel& model, const LoopSynthesis& syn,
                     LoopState& st, const Vec& xi, const Vec& w,
                     CodecSession* codec, BitWriter* bits_out) {
  if (st.x.size() != model.n() || st.xhat_pred.size() != model.n() ||
      w.size() != model.n())
    throw LengthMismatch("loop_step: state dimension mismatch");

  StepRecord rec;
  if (syn.transmits) {
    const int r = syn.sensor.r;
    if (xi.size() != r)
      throw LengthMismatch("loop_step: dither dimension mismatch");
    rec.theta = syn.sensor.C * (st.x - st.xhat_pred);
    rec.cells.resize(static_cast<std::size_t>(r));
    rec.q.resize(r);
    for (int i = 0; i < r; ++i) {
      const auto cell =
          quantize_uniform(rec.theta[i] + xi[i], syn.sensor.Delta[i]);
      rec.cells[static_cast<std::size_t>(i)] = cell.index;
      rec.q[i] = cell.value - xi[i];
    }
    if (codec) {
      BitWriter local;
      BitWriter* out = bits_out ? bits_out : &local;
      rec.bits = codec->encode_step(rec.cells, xi, *out);
    }
    rec.xhat = st.xhat_pred + syn.kalman.L * rec.q;
  } else {
    rec.xhat = st.xhat_pred;
  }

  rec.u = syn.cert.K * rec.xhat;
  const Vec x_next = model.A * st.x + model.B * rec.u + w;
  rec.cost = x_next.dot(model.Q * x_next) + rec.u.dot(model.R * rec.u);
  st.xhat_pred = model.A * rec.xhat + model.B * rec.u;
  st.x = x_next;
  if (!st.x.allFinite() ||
      st.x.lpNorm<Eigen::Infinity>() > kDivergenceLimit)
    throw NumericalDivergence("loop_step: state magnitude exceeded 1e9");
  return rec;
}

SimulationSummary simulate(const PlantModel& model, const LoopSynthesis& syn,
                           const SimOptions& opt) {
  if (opt.trials < 1 || opt.steps < 1 ||
      static_cast<double>(opt.trials) * static_cast<double>(opt.steps) < 1e4)
    throw InsufficientSamples("simulate: trials*steps must be at least 1e4");
  if (opt.steps <= opt.burn_in + 2 * opt.batch_length)
    throw InsufficientSamples("simulate: steps must exceed burn-in by at "
                              "least two batches");
  model.validate();

  const Mat w_sqrt = psd_sqrt(SymMatrix(model.W));
  const Mat x0_sqrt = psd_sqrt(SymMatrix(model.P_prior));
  const LoopMoments moments = analytic_loop_covariance(model, syn);

  std::vector<TrialStats> slots(static_cast<std::size_t>(opt.trials));
  const auto work = [&](int trial) {
    auto& slot = slots[static_cast<std::size_t>(trial)];
    try {
      slot = run_trial(model, syn, opt, trial, w_sqrt, x0_sqrt);
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
  };
  if (opt.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int trial = 0; trial < opt.trials; ++trial) work(trial);
  } else {
    for (int trial = 0; trial < opt.trials; ++trial) work(trial);
  }
  for (const TrialStats& ts : slots)
    if (!ts.error.empty()) throw NumericalDivergence(ts.error);

  SimulationSummary out;
  out.steps = opt.steps;
  out.trials = opt.trials;
  out.transmits = syn.transmits;
  out.di_bits = syn.sol.di_bits;
  out.upper_bits =
      syn.sol.di_bits +
      capacity_gap_bound(syn.transmits ? syn.sensor.r : 0) + 1.0;

  Vec sum_x = Vec::Zero(model.n());
  Mat sum_xx = Mat::Zero(model.n(), model.n());
  std::vector<double> cost_batches;
  std::vector<double> rate_batches;
  for (const TrialStats& ts : slots) {
    out.samples += ts.n;
    out.avg_cost += ts.sum_cost;
    out.avg_rate_bits += ts.sum_bits;
    out.avg_rate_data_bits += ts.sum_data_bits;
    sum_x += ts.sum_x;
    sum_xx += ts.sum_xx;
    cost_batches.insert(cost_batches.end(), ts.cost_batches.begin(),
                        ts.cost_batches.end());
    rate_batches.insert(rate_batches.end(), ts.rate_batches.begin(),
                        ts.rate_batches.end());
    out.decoder_divergence = std::max(out.decoder_divergence, ts.decoder_div);
  }
  const auto samples = static_cast<double>(out.samples);
  out.avg_cost /= samples;
  out.avg_rate_bits /= samples;
  out.avg_rate_data_bits /= samples;
  out.emp_mean_x = sum_x / samples;
  out.emp_cov_x = sum_xx / samples - out.emp_mean_x * out.emp_mean_x.transpose();

  const auto batches = static_cast<double>(cost_batches.size());
  out.cost_ci_halfwidth = 3.0 * sample_std(cost_batches) / std::sqrt(batches);
  out.rate_ci_halfwidth = 3.0 * sample_std(rate_batches) / std::sqrt(batches);
  out.stationary_cov_error = (out.emp_cov_x - moments.cov_x).norm() /
                             std::max(1e-300, moments.cov_x.norm());
  return out;
}

LoopMoments analytic_loop_covariance(const PlantModel& model,
                                     const LoopSynthesis& syn) {
  const int n = model.n();
  const Mat Acl = model.A + model.B * syn.cert.K;
  Mat M = Mat::Zero(2 * n, 2 * n);
  Mat cst = Mat::Zero(2 * n, 2 * n);
  cst.bottomRightCorner(n, n) = model.W;
  M.topLeftCorner(n, n) = Acl;
  if (syn.transmits) {
    const Mat LC = syn.kalman.L * syn.sensor.C;
    M.topRightCorner(n, n) = Acl * LC;
    M.bottomRightCorner(n, n) = model.A * (Mat::Identity(n, n) - LC);
    const Mat V = syn.sensor.V_diag.asDiagonal();
    Mat N(2 * n, syn.sensor.r);
    N.topRows(n) = Acl * syn.kalman.L;
    N.bottomRows(n) = -model.A * syn.kalman.L;
    cst += N * V * N.transpose();
  } else {
    M.bottomRightCorner(n, n) = model.A;
  }

  LoopMoments out;
  out.cov_z = lyapunov_sum(M, cst);
  Mat sel_x(n, 2 * n);
  sel_x.leftCols(n) = Mat::Identity(n, n);
  sel_x.rightCols(n) = Mat::Identity(n, n);
  out.cov_x = sel_x * out.cov_z * sel_x.transpose();

  Mat cov_xhat;
  if (syn.transmits) {
    const Mat LC = syn.kalman.L * syn.sensor.C;
    Mat sel(n, 2 * n);
    sel.leftCols(n) = Mat::Identity(n, n);
    sel.rightCols(n) = LC;
    const Mat V = syn.sensor.V_diag.asDiagonal();
    cov_xhat = sel * out.cov_z * sel.transpose() +
               syn.kalman.L * V * syn.kalman.L.transpose();
  } else {
    cov_xhat = out.cov_z.topLeftCorner(n, n);
  }
  out.cov_u = syn.cert.K * cov_xhat * syn.cert.K.transpose();
  out.cost = (model.Q * out.cov_x).trace() + (model.R * out.cov_u).trace();
  const Mat p_filt = syn.transmits
                         ? syn.kalman.P_filt
                         : out.cov_z.bottomRightCorner(n, n).eval();
  out.cost_identity = (syn.cert.Theta * p_filt).trace() +
                      (model.W * syn.cert.S).trace();
  return out;
}

}  // namespace rlqg
