#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "ratelqg/matrix_kernel.hpp"

namespace rlqg {

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Rate-distortion function of a zero-mean Gaussian with covariance cov at
// mean-square distortion D, by reverse water-filling over the eigenvalues.
// Returns bits; 0 when D >= Tr(cov).
double gaussian_rdf(const SymMatrix& cov, double D);
double gaussian_rdf_scalar(double variance, double D);

// (r/2) log2(4 pi e / 12): bound on the capacity of the additive uniform
// noise channel with input power D = sum Delta_i^2 / 12.
double capacity_gap_bound(int r);

// (1/2) log2(2 pi e / 12) + 1: high-rate per-component excess of the
// prefix-coded dithered quantizer over the Gaussian rate-distortion
// function.
double entropy_coding_overhead_bound();

// I(x; x+eta) in bits for x ~ N(0, sigma2) and eta ~ U[-delta/2, delta/2],
// via adaptive quadrature of the differential entropy of the convolution.
// Quadrature error below 1e-6 bits or QuadratureFailure.
double uniform_gaussian_channel_mi(double sigma2, double delta);

// Proof-side quantities for one synthesized design, accounted per
// component (V is diagonal, so the per-component split is exact).
struct GapReport {
  double D = 0.0;              // sum Delta_i^2 / 12 = Tr(V)
  double rdf_bits = 0.0;       // sum_i RDF(sigma_i^2, Delta_i^2/12)
  double entropy_bits = 0.0;   // sum_i (h(y_i) - log2 Delta_i)
  double cap_bound_bits = 0.0; // (r/2) log2(4 pi e / 12)
  double slack = 0.0;          // cap_bound - (entropy - rdf), >= 0
};

// sigma2: per-component innovation variances; delta: quantizer steps.
GapReport gap_report(const Vec& sigma2, const Vec& delta);

// Monte Carlo estimate of H(q~ | xi) for scalar theta ~ N(0, sigma2),
// dither U[-delta/2, delta/2): empirical mean of -log2 P(cell | xi).
double mc_conditional_entropy(double sigma2, double delta, long long samples,
                              std::uint64_t seed);

// One-sample Kolmogorov-Smirnov distance between samples and U[lo, hi).
// Throws InsufficientSamples when samples is empty and InvalidModel when
// hi <= lo.
double ks_statistic_uniform(std::vector<double> samples, double lo, double hi);

}  // namespace rlqg
