#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "ratelqg/rng.hpp"
#include "ratelqg/validation.hpp"

using namespace rlqg;

namespace {

// Independent reverse water-filling route: bisect on the water level w with
// sum_i min(lambda_i, w) = D, then R = sum_i (1/2) log2(lambda_i / min(
// lambda_i, w)).
double waterfill_bisect(std::vector<double> lam, double D) {
  double total = 0.0;
  for (double l : lam) total += l;
  if (D >= total) return 0.0;
  double lo = 0.0;
  double hi = *std::max_element(lam.begin(), lam.end());
  for (int it = 0; it < 200; ++it) {
    const double w = 0.5 * (lo + hi);
    double filled = 0.0;
    for (double l : lam) filled += std::min(l, w);
    (filled > D ? hi : lo) = w;
  }
  const double w = 0.5 * (lo + hi);
  double bits = 0.0;
  for (double l : lam)
    if (l > w) bits += 0.5 * std::log2(l / w);
  return bits;
}

Mat rotation2(double angle) {
  Mat u(2, 2);
  u << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return u;
}

}  // namespace

TEST_CASE("normal_cdf matches tabulated points") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021049).epsilon(1e-9));
  CHECK(normal_cdf(-1.96) ==
        doctest::Approx(1.0 - normal_cdf(1.96)).epsilon(1e-12));
}

TEST_CASE("scalar rate-distortion matches hand values") {
  CHECK(gaussian_rdf_scalar(1.0, 0.25) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gaussian_rdf_scalar(1.0, 1.0) == 0.0);
  CHECK(gaussian_rdf_scalar(1.0, 5.0) == 0.0);
  CHECK_THROWS_AS(gaussian_rdf_scalar(1.0, 0.0), Error);
  CHECK_THROWS_AS(gaussian_rdf_scalar(1.0, -1.0), Error);
}

TEST_CASE("two-mode water-filling splits distortion evenly when it can") {
  const double bits = gaussian_rdf(SymMatrix::diag(Vec{{2.0, 1.0}}), 1.0);
  CHECK(bits == doctest::Approx(1.5).epsilon(1e-12));

  // When one mode is tiny the level settles on the remaining one.
  const double partial = gaussian_rdf(SymMatrix::diag(Vec{{4.0, 0.01}}), 1.0);
  CHECK(partial == doctest::Approx(0.5 * std::log2(4.0 / 0.99)).epsilon(1e-12));
}

TEST_CASE("rate-distortion is basis invariant") {
  const Vec lam{{3.0, 0.4}};
  for (double angle : {0.3, 1.1, 2.5}) {
    const Mat u = rotation2(angle);
    const Mat cov = u * lam.asDiagonal() * u.transpose();
    for (double d : {0.1, 0.5, 1.0, 3.0}) {
      CHECK(gaussian_rdf(SymMatrix(cov), d) ==
            doctest::Approx(gaussian_rdf(SymMatrix::diag(lam), d))
                .epsilon(1e-10));
    }
  }
}

TEST_CASE("sort-based water-filling agrees with a bisection oracle") {
  CounterRng rng(9, 0x222);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 1 + trial % 5;
    std::vector<double> lam(static_cast<std::size_t>(k));
    Vec lam_vec(k);
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      lam[static_cast<std::size_t>(i)] =
          0.01 + 5.0 * rng.u01(static_cast<std::uint64_t>(trial),
                               static_cast<std::uint64_t>(i));
      lam_vec(i) = lam[static_cast<std::size_t>(i)];
      total += lam_vec(i);
    }
    for (double frac : {0.05, 0.3, 0.8, 0.99}) {
      const double d = frac * total;
      const double got = gaussian_rdf(SymMatrix::diag(lam_vec), d);
      const double want = waterfill_bisect(lam, d);
      CHECK(got == doctest::Approx(want).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("gap constants match their defining formulas") {
  CHECK(capacity_gap_bound(0) == 0.0);
  const double per_rank =
      0.5 * std::log2(4.0 * std::numbers::pi * std::numbers::e / 12.0);
  CHECK(capacity_gap_bound(1) == doctest::Approx(per_rank).epsilon(1e-15));
  CHECK(capacity_gap_bound(3) ==
        doctest::Approx(3.0 * per_rank).epsilon(1e-15));
  CHECK_THROWS_AS(capacity_gap_bound(-1), Error);

  CHECK(entropy_coding_overhead_bound() ==
        doctest::Approx(0.5 * std::log2(2.0 * std::numbers::pi *
                                        std::numbers::e / 12.0) +
                        1.0)
            .epsilon(1e-15));
}

TEST_CASE("channel mutual information vanishes with the signal") {
  CHECK(std::abs(uniform_gaussian_channel_mi(1e-12, 1.0)) < 1e-5);
  CHECK_THROWS_AS(uniform_gaussian_channel_mi(0.0, 1.0), Error);
  CHECK_THROWS_AS(uniform_gaussian_channel_mi(1.0, 0.0), Error);
}

TEST_CASE("channel mutual information approaches the Gaussian entropy at "
          "high rate") {
  const double sigma2 = 1e4;
  const double delta = 0.1;
  const double mi = uniform_gaussian_channel_mi(sigma2, delta);
  const double gauss = 0.5 * std::log2(2.0 * std::numbers::pi *
                                       std::numbers::e * sigma2) -
                       std::log2(delta);
  CHECK(std::abs(mi - gauss) <= 1e-3);

  const double rdf = gaussian_rdf_scalar(sigma2, delta * delta / 12.0);
  CHECK(mi - rdf ==
        doctest::Approx(0.5 * std::log2(2.0 * std::numbers::pi *
                                        std::numbers::e / 12.0))
            .epsilon(1e-3));
}

TEST_CASE("per-component rate excess stays inside the capacity gap") {
  for (double sigma : {0.3, 1.0, 3.0}) {
    for (double delta : {0.5, 1.0, 2.0, 4.0}) {
      const double mi = uniform_gaussian_channel_mi(sigma * sigma, delta);
      const double rdf =
          gaussian_rdf_scalar(sigma * sigma, delta * delta / 12.0);
      const double excess = mi - rdf;
      CHECK(excess >= -1e-9);
      CHECK(excess <= capacity_gap_bound(1) + 1e-9);
    }
  }
}

TEST_CASE("gap report aggregates the per-component quantities") {
  const Vec sigma2{{2.0, 0.5}};
  const Vec delta{{1.0, 0.8}};
  const GapReport rep = gap_report(sigma2, delta);

  const double d0 = 1.0 / 12.0;
  const double d1 = 0.64 / 12.0;
  CHECK(rep.D == doctest::Approx(d0 + d1).epsilon(1e-12));
  CHECK(rep.rdf_bits ==
        doctest::Approx(gaussian_rdf_scalar(2.0, d0) +
                        gaussian_rdf_scalar(0.5, d1))
            .epsilon(1e-12));
  CHECK(rep.entropy_bits ==
        doctest::Approx(uniform_gaussian_channel_mi(2.0, 1.0) +
                        uniform_gaussian_channel_mi(0.5, 0.8))
            .epsilon(1e-9));
  CHECK(rep.cap_bound_bits == doctest::Approx(capacity_gap_bound(2)).epsilon(1e-12));
  CHECK(rep.slack ==
        doctest::Approx(rep.cap_bound_bits -
                        (rep.entropy_bits - rep.rdf_bits))
            .epsilon(1e-9));
  CHECK(rep.slack >= 0.0);
}

TEST_CASE("Monte Carlo conditional entropy estimates the channel rate") {
  const double sigma2 = 2.1;
  const double delta = 1.1;
  const double mi = uniform_gaussian_channel_mi(sigma2, delta);
  const double mc = mc_conditional_entropy(sigma2, delta, 200000, 1);
  CHECK(std::abs(mc - mi) < 0.02);

  CHECK(mc_conditional_entropy(sigma2, delta, 5000, 9) ==
        mc_conditional_entropy(sigma2, delta, 5000, 9));
  CHECK_THROWS_AS(mc_conditional_entropy(1.0, 1.0, 0, 0),
                  InsufficientSamples);
}

TEST_CASE("KS statistic separates uniform from non-uniform samples") {
  {
    const std::vector<double> s{0.125, 0.375, 0.625, 0.875};
    CHECK(ks_statistic_uniform(s, 0.0, 1.0) ==
          doctest::Approx(0.125).epsilon(1e-15));
  }

  CounterRng rng(3, 0x777);
  std::vector<double> uniform, squashed;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.u01(static_cast<std::uint64_t>(i), 0);
    uniform.push_back(u);
    squashed.push_back(u * u);
  }
  const double root_n = std::sqrt(static_cast<double>(n));
  CHECK(root_n * ks_statistic_uniform(uniform, 0.0, 1.0) < 1.9495);
  CHECK(root_n * ks_statistic_uniform(squashed, 0.0, 1.0) > 3.0);

  CHECK_THROWS_AS(ks_statistic_uniform({}, 0.0, 1.0), InsufficientSamples);
  CHECK_THROWS_AS(ks_statistic_uniform({0.5}, 1.0, 0.0), InvalidModel);
}
