#include "ratelqg/validation.hpp"

#include <algorithm>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ratelqg/errors.hpp"
#include "ratelqg/quantizer.hpp"
#include "ratelqg/rng.hpp"

namespace rlqg {

namespace {

// Exact reverse water-filling over sorted eigenvalues: components below the
// water level keep their full variance as distortion, the rest share level w.
double waterfill_bits(std::vector<double> lam, double D) {
  std::sort(lam.begin(), lam.end());
  const int r = static_cast<int>(lam.size());
  double total = 0.0;
  for (double v : lam) total += v;
  if (D >= total) return 0.0;
  double inactive = 0.0;
  for (int j = 0; j < r; ++j) {
    const double w = (D - inactive) / static_cast<double>(r - j);
    const double lo = (j == 0) ? 0.0 : lam[static_cast<std::size_t>(j - 1)];
    if (w >= lo && w <= lam[static_cast<std::size_t>(j)]) {
      double bits = 0.0;
      for (int i = j; i < r; ++i)
        bits += 0.5 * std::log2(lam[static_cast<std::size_t>(i)] / w);
      return bits;
    }
    inactive += lam[static_cast<std::size_t>(j)];
  }
  throw Error("gaussian_rdf: water level search failed");
}

}  // namespace

double gaussian_rdf(const SymMatrix& cov, double D) {
  if (!(D > 0.0)) throw Error("gaussian_rdf: distortion must be positive");
  const EigSym eig = eig_sym(cov);
  std::vector<double> lam;
  lam.reserve(static_cast<std::size_t>(eig.values.size()));
  for (int i = 0; i < eig.values.size(); ++i)
    lam.push_back(std::max(eig.values[i], 0.0));
  return waterfill_bits(std::move(lam), D);
}

double gaussian_rdf_scalar(double variance, double D) {
  if (!(D > 0.0)) throw Error("gaussian_rdf: distortion must be positive");
  if (variance <= D) return 0.0;
  return 0.5 * std::log2(variance / D);
}

double capacity_gap_bound(int r) {
  if (r < 0) throw Error("capacity_gap_bound: negative rank");
  return 0.5 * static_cast<double>(r) *
         std::log2(4.0 * std::numbers::pi * std::numbers::e / 12.0);
}

double entropy_coding_overhead_bound() {
  return 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e / 12.0) +
         1.0;
}

double uniform_gaussian_channel_mi(double sigma2, double delta) {
  if (!(sigma2 > 0.0) || !(delta > 0.0))
    throw Error("uniform_gaussian_channel_mi: sigma2 and delta must be "
                "positive");
  const double sigma = std::sqrt(sigma2);
  const double half = 0.5 * delta;
  const auto density = [=](double y) {
    return (normal_cdf((y + half) / sigma) - normal_cdf((y - half) / sigma)) /
           delta;
  };
  const auto integrand = [=](double y) {
    const double f = density(y);
    return f > 0.0 ? -f * std::log2(f) : 0.0;
  };
  const double limit = half + 12.0 * sigma;
  double err = 0.0;
  const double h_y =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          integrand, -limit, limit, 12, 1e-10, &err);
  if (!std::isfinite(h_y) || err > 1e-6)
    throw QuadratureFailure("uniform_gaussian_channel_mi: quadrature did "
                            "not converge");
  return h_y - std::log2(delta);
}

GapReport gap_report(const Vec& sigma2, const Vec& delta) {
  if (sigma2.size() != delta.size() || sigma2.size() == 0)
    throw LengthMismatch("gap_report: sigma2 and delta lengths must match");
  GapReport rep;
  const int r = static_cast<int>(sigma2.size());
  for (int i = 0; i < r; ++i) {
    const double Di = delta[i] * delta[i] / 12.0;
    rep.D += Di;
    rep.rdf_bits += gaussian_rdf_scalar(sigma2[i], Di);
    rep.entropy_bits += uniform_gaussian_channel_mi(sigma2[i], delta[i]);
  }
  rep.cap_bound_bits = capacity_gap_bound(r);
  rep.slack = rep.cap_bound_bits - (rep.entropy_bits - rep.rdf_bits);
  return rep;
}

double mc_conditional_entropy(double sigma2, double delta, long long samples,
                              std::uint64_t seed) {
  if (!(sigma2 > 0.0) || !(delta > 0.0))
    throw Error("mc_conditional_entropy: sigma2 and delta must be positive");
  if (samples < 1)
    throw InsufficientSamples("mc_conditional_entropy: need at least one "
                              "sample");
  const double sigma = std::sqrt(sigma2);
  const CounterRng theta_rng(seed, kStreamProcess);
  const CounterRng dither_rng(seed, kStreamDither);
  double acc = 0.0;
  for (long long t = 0; t < samples; ++t) {
    const auto step = static_cast<std::uint64_t>(t);
    const double theta = sigma * theta_rng.gaussian(step, 0);
    const double xi = dither_rng.uniform_centered(0.5 * delta, step, 0);
    const auto cell = quantize_uniform(theta + xi, delta).index;
    const double hi = (static_cast<double>(cell) * delta + 0.5 * delta - xi) /
                      sigma;
    const double lo = (static_cast<double>(cell) * delta - 0.5 * delta - xi) /
                      sigma;
    const double p = normal_cdf(hi) - normal_cdf(lo);
    if (!(p > 0.0))
      throw NumericalDivergence("mc_conditional_entropy: degenerate cell "
                                "probability");
    acc -= std::log2(p);
  }
  return acc / static_cast<double>(samples);
}

double ks_statistic_uniform(std::vector<double> samples, double lo,
                            double hi) {
  if (samples.empty())
    throw InsufficientSamples("ks_statistic_uniform: empty sample");
  if (!(hi > lo))
    throw InvalidModel("ks_statistic_uniform: hi must exceed lo");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f =
        std::clamp((samples[i] - lo) / (hi - lo), 0.0, 1.0);
    const double below = static_cast<double>(i) / n;
    const double above = static_cast<double>(i + 1) / n;
    d = std::max({d, f - below, above - f});
  }
  return d;
}

}  // namespace rlqg
