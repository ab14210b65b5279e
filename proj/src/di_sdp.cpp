#include "ratelqg/di_sdp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "ratelqg/validation.hpp"

namespace rlqg {

namespace {

constexpr double kMuInitial = 1.0;
constexpr double kMuShrink = 0.2;
constexpr double kDualityTarget = 1e-9;
constexpr double kKktTolerance = 1e-6;
constexpr double kCenterTol = 2e-7;
constexpr int kInnerCap = 200;

double logdet_nat(const Mat& m) {
  return logdet_spd(SymMatrix(m)) * std::numbers::ln2;
}

bool chol_ok(const Mat& m) {
  Eigen::LLT<Mat> llt(0.5 * (m + m.transpose()));
  return llt.info() == Eigen::Success;
}

Mat sym_inverse(const Mat& m) {
  Mat inv = m.inverse();
  return 0.5 * (inv + inv.transpose());
}

// Basis of symmetric n x n matrices: e_i e_i^T on the diagonal,
// e_i e_j^T + e_j e_i^T off it.
struct SymBasis {
  explicit SymBasis(int n) : n(n) {
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) pairs.emplace_back(i, j);
  }
  int size() const { return static_cast<int>(pairs.size()); }
  Mat element(int a) const {
    Mat e = Mat::Zero(n, n);
    const auto [i, j] = pairs[a];
    e(i, j) = 1.0;
    e(j, i) = 1.0;
    return e;
  }
  // <G, E_a> for symmetric G
  double inner(const Mat& g, int a) const {
    const auto [i, j] = pairs[a];
    return (i == j) ? g(i, i) : 2.0 * g(i, j);
  }
  Mat expand(const Vec& coeffs) const {
    Mat p = Mat::Zero(n, n);
    for (int a = 0; a < size(); ++a) {
      const auto [i, j] = pairs[a];
      p(i, j) += coeffs(a);
      if (i != j) p(j, i) += coeffs(a);
    }
    return p;
  }
  int n;
  std::vector<std::pair<int, int>> pairs;
};

struct Problem {
  Mat A, W, Theta;
  Mat M;     // A^T W^-1 A
  double b;  // gamma - Tr(W S)
  int n;

  Mat t_of(const Mat& p) const {
    return A * p * A.transpose() + W - p;
  }
  double slack_of(const Mat& p) const { return b - (Theta * p).trace(); }
  bool feasible(const Mat& p) const {
    return chol_ok(p) && chol_ok(t_of(p)) && slack_of(p) > 0.0;
  }
  // Objective in nats: 1/2 ln det(P^-1 + M) + 1/2 ln det W.
  double objective(const Mat& p) const {
    return 0.5 * logdet_nat(sym_inverse(p) + M) + 0.5 * logdet_nat(W);
  }
  double barrier_value(const Mat& p, double mu) const {
    return objective(p) +
           mu * (-std::log(slack_of(p)) - logdet_nat(t_of(p)));
  }
};

struct Derivatives {
  Mat grad;  // gradient of the barrier function at P
  Mat z;     // P^-1
  Mat pi;    // (P^-1 + M)^-1
  Mat ti;    // T^-1
  double slack;
};

Derivatives eval_derivatives(const Problem& pr, const Mat& p, double mu) {
  Derivatives d;
  d.z = sym_inverse(p);
  d.pi = sym_inverse(d.z + pr.M);
  d.ti = sym_inverse(pr.t_of(p));
  d.slack = pr.slack_of(p);
  d.grad = -0.5 * d.z * d.pi * d.z +
           mu * (pr.Theta / d.slack + d.ti -
                 pr.A.transpose() * d.ti * pr.A);
  d.grad = 0.5 * (d.grad + d.grad.transpose());
  return d;
}

Mat assemble_hessian(const Problem& pr, const SymBasis& basis,
                     const Derivatives& d, double mu) {
  const int nb = basis.size();
  std::vector<Mat> e(nb), f(nb), tp(nb), pif(nb), titp(nb);
  for (int a = 0; a < nb; ++a) {
    e[a] = basis.element(a);
    f[a] = d.z * e[a] * d.z;
    tp[a] = pr.A * e[a] * pr.A.transpose() - e[a];
    pif[a] = d.pi * f[a];
    titp[a] = d.ti * tp[a];
  }
  Vec ttheta(nb);
  for (int a = 0; a < nb; ++a) ttheta(a) = (pr.Theta * e[a]).trace();

  Mat h(nb, nb);
  for (int a = 0; a < nb; ++a) {
    for (int bidx = a; bidx < nb; ++bidx) {
      const double obj =
          0.5 * (-(pif[a] * pif[bidx]).trace() +
                 (pif[a] * e[bidx] * d.z).trace() +
                 (pif[bidx] * e[a] * d.z).trace());
      const double bud = ttheta(a) * ttheta(bidx) / (d.slack * d.slack);
      const double lmi = (titp[a] * titp[bidx]).trace();
      h(a, bidx) = obj + mu * (bud + lmi);
      h(bidx, a) = h(a, bidx);
    }
  }
  return h;
}

// Stationarity of the original problem at (p, mu): the barrier gradient is
// exactly grad f + lam1 Theta + Lam2 - A' Lam2 A for the central-path duals,
// normalized DIMACS-style by the sizes of its terms.
double normalized_stationarity(const Problem& pr, const Derivatives& d,
                               double mu) {
  const Mat obj = (-0.5 * d.z * d.pi * d.z).eval();
  const Mat lmi =
      (mu * (d.ti - pr.A.transpose() * d.ti * pr.A)).eval();
  const double denom = 1.0 + obj.norm() + (mu / d.slack) * pr.Theta.norm() +
                       lmi.norm();
  return d.grad.norm() / denom;
}

struct CenterResult {
  Mat p;
  int newton_steps = 0;
  double stationarity = 0.0;
};

// Damped Newton on the self-concordant rescaling (2/mu)(f + mu barrier):
// step length 1/(1+lambda) in the global phase, full steps once inside the
// quadratic region, feasibility as the only line-search test. Value-based
// acceptance is useless here: near the path's end the stiff barrier
// curvature pushes per-step improvements below double resolution of phi.
CenterResult center(const Problem& pr, const SymBasis& basis, Mat p,
                    double mu) {
  CenterResult res;
  const int nb = basis.size();
  Mat best_p = p;
  double best_stat = std::numeric_limits<double>::infinity();
  int no_progress = 0;
  for (int it = 0; it < kInnerCap; ++it) {
    const Derivatives d = eval_derivatives(pr, p, mu);
    const double stat = normalized_stationarity(pr, d, mu);
    if (stat < best_stat) {
      best_stat = stat;
      best_p = p;
      no_progress = 0;
    } else if (++no_progress > 8) {
      break;  // rounding floor reached
    }
    if (stat < kCenterTol) break;

    Vec g(nb);
    for (int a = 0; a < nb; ++a) g(a) = basis.inner(d.grad, a);
    Mat h = assemble_hessian(pr, basis, d, mu);
    Vec step;
    double ridge = 0.0;
    bool solved = false;
    for (;;) {
      Eigen::LDLT<Mat> ldlt(h + ridge * Mat::Identity(nb, nb));
      step = -ldlt.solve(g);
      if (ldlt.info() == Eigen::Success && g.dot(step) < 0.0) {
        solved = true;
        break;
      }
      ridge = (ridge == 0.0) ? 1e-12 * (1.0 + h.norm()) : ridge * 100.0;
      if (ridge > 1e6 * (1.0 + h.norm())) break;
    }
    if (!solved) break;

    const double lambda = std::sqrt(2.0 * -g.dot(step) / mu);
    double t = lambda <= 0.25 ? 1.0 : 1.0 / (1.0 + lambda);
    const Mat dp = basis.expand(step);
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Mat trial = p + t * dp;
      if (pr.feasible(trial)) {
        p = 0.5 * (trial + trial.transpose());
        moved = true;
        break;
      }
      t *= 0.5;
    }
    ++res.newton_steps;
    if (!moved) break;
  }
  res.p = best_p;
  res.stationarity = best_stat;
  return res;
}

Mat initial_point(const Problem& pr) {
  // Stationary covariance proxy X = A X A^T + W when stable, else W,
  // shrunk to sit strictly inside the budget.
  Mat x = pr.W;
  if (spectral_radius(pr.A) < 1.0) {
    for (int it = 0; it < 100000; ++it) {
      const Mat next = pr.A * x * pr.A.transpose() + pr.W;
      const double diff = (next - x).norm();
      x = 0.5 * (next + next.transpose());
      if (diff < 1e-12 * std::max(1.0, x.norm())) break;
    }
  }
  const double load = std::max((pr.Theta * x).trace(), 1e-12);
  const double eps = 0.5 * std::min(1.0, pr.b / load);
  return eps * x;
}

double kkt_residual_at(const Problem& pr, const Mat& p, double mu) {
  const Derivatives d = eval_derivatives(pr, p, mu);
  const double stationarity = normalized_stationarity(pr, d, mu);
  const double duality = mu * (pr.n + 1);

  double primal = 0.0;
  primal = std::max(primal, -d.slack);
  Eigen::SelfAdjointEigenSolver<Mat> et(pr.t_of(p));
  primal = std::max(primal, -et.eigenvalues().minCoeff());
  Eigen::SelfAdjointEigenSolver<Mat> ep(p);
  primal = std::max(primal, -ep.eigenvalues().minCoeff());

  return std::max({stationarity, duality, primal});
}

}  // namespace

DiSolution solve_di(const PlantModel& model, const LqrCertainty& cert,
                    double gamma) {
  const double tr_ws = min_cost(model, cert);
  if (!(gamma > tr_ws))
    throw InfeasibleBudget("gamma = " + std::to_string(gamma) +
                           " does not exceed Tr(W S) = " +
                           std::to_string(tr_ws));

  Problem pr;
  pr.A = model.A;
  pr.W = model.W;
  pr.Theta = cert.Theta;
  pr.M = model.A.transpose() * sym_inverse(model.W) * model.A;
  pr.M = 0.5 * (pr.M + pr.M.transpose());
  pr.b = gamma - tr_ws;
  pr.n = model.n();

  const SymBasis basis(pr.n);
  Mat p = initial_point(pr);
  if (!pr.feasible(p))
    throw SolverFailure("interior initialization is infeasible");

  int total_steps = 0;
  double mu = kMuInitial;
  for (;;) {
    const CenterResult cr = center(pr, basis, p, mu);
    p = cr.p;
    total_steps += cr.newton_steps;
    if (mu * (pr.n + 1) < kDualityTarget) break;
    mu *= kMuShrink;
  }

  DiSolution sol;
  sol.gamma = gamma;
  sol.P_opt = 0.5 * (p + p.transpose());
  const Mat z = sym_inverse(sol.P_opt);
  sol.Pi_opt = sym_inverse(z + pr.M);
  const double di_nats = 0.5 * logdet_nat(z + pr.M) + 0.5 * logdet_nat(pr.W);
  sol.di_bits = std::max(0.0, di_nats / std::numbers::ln2);
  Mat snr = z - sym_inverse(pr.A * sol.P_opt * pr.A.transpose() + pr.W);
  sol.snr = 0.5 * (snr + snr.transpose());
  sol.rank_r = psd_rank(SymMatrix(sol.snr));
  sol.kkt_residual = kkt_residual_at(pr, sol.P_opt, mu);
  sol.solver_iterations = total_steps;
  sol.budget_slack = pr.slack_of(sol.P_opt);
  sol.budget_dual = mu / sol.budget_slack;

  if (sol.kkt_residual > kKktTolerance)
    throw SolverFailure("barrier iteration stalled with KKT residual " +
                        std::to_string(sol.kkt_residual));
  return sol;
}

std::vector<TradeoffPoint> tradeoff_curve(const PlantModel& model,
                                          const LqrCertainty& cert,
                                          const std::vector<double>& gammas,
                                          bool parallel) {
  const int npts = static_cast<int>(gammas.size());
  std::vector<TradeoffPoint> out(npts);
  auto eval = [&](int i) {
    TradeoffPoint& pt = out[i];
    pt.gamma = gammas[i];
    try {
      const DiSolution sol = solve_di(model, cert, gammas[i]);
      pt.di_bits = sol.di_bits;
      pt.rank_r = sol.rank_r;
      pt.upper_bits =
          sol.di_bits + capacity_gap_bound(sol.rank_r) + 1.0;
      pt.ok = true;
    } catch (const Error& e) {
      pt.di_bits = std::numeric_limits<double>::quiet_NaN();
      pt.upper_bits = std::numeric_limits<double>::quiet_NaN();
      pt.error = e.what();
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < npts; ++i) eval(i);
  } else {
    for (int i = 0; i < npts; ++i) eval(i);
  }
  return out;
}

}  // namespace rlqg
