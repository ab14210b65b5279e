#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "ratelqg/quantizer.hpp"
#include "ratelqg/rng.hpp"
#include "ratelqg/validation.hpp"

using namespace rlqg;

namespace {

bool exactly_equal(const Vec& a, const Vec& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

}  // namespace

TEST_CASE("uniform lattice cells are half-open with upper edges rounding up") {
  CHECK(quantize_uniform(0.5, 1.0).index == 1);
  CHECK(quantize_uniform(0.49999999, 1.0).index == 0);
  CHECK(quantize_uniform(-0.5, 1.0).index == 0);
  CHECK(quantize_uniform(-0.50000001, 1.0).index == -1);
  CHECK(quantize_uniform(-1.5, 1.0).index == -1);
  CHECK(quantize_uniform(0.0, 1.0).index == 0);
  CHECK(quantize_uniform(7.4, 2.0).index == 4);
  CHECK(quantize_uniform(7.4, 2.0).value == 8.0);

  const auto q = quantize_uniform(-3.2, 0.25);
  CHECK(q.value == static_cast<double>(q.index) * 0.25);
  CHECK(std::abs(q.value - (-3.2)) <= 0.125 + 1e-15);
}

TEST_CASE("quantize_uniform rejects bad inputs") {
  CHECK_THROWS_AS(quantize_uniform(1.0, 0.0), Error);
  CHECK_THROWS_AS(quantize_uniform(1.0, -2.0), Error);
  CHECK_THROWS_AS(
      quantize_uniform(std::numeric_limits<double>::infinity(), 1.0),
      NonFinite);
  CHECK_THROWS_AS(
      quantize_uniform(std::numeric_limits<double>::quiet_NaN(), 1.0),
      NonFinite);
}

TEST_CASE("dither stream supports random access and replays exactly") {
  const Vec deltas{{2.0, 0.5}};
  DitherStream a(7, deltas);
  DitherStream b(7, deltas);

  // Values pinned against an independent evaluation of the mixing chain.
  CHECK(a.at(0)(0) == doctest::Approx(0.37970435586536855).epsilon(1e-16));
  CHECK(a.at(5)(1) == doctest::Approx(-0.14301463714053714).epsilon(1e-16));
  DitherStream c(7, deltas, 3);
  CHECK(c.at(0)(0) == doctest::Approx(0.17924596993784236).epsilon(1e-16));

  std::vector<Vec> seq;
  for (int t = 0; t < 64; ++t) seq.push_back(a.next());
  CHECK(a.position() == 64);
  for (int t = 0; t < 64; ++t) {
    CHECK(exactly_equal(seq[static_cast<std::size_t>(t)],
                        b.at(static_cast<std::uint64_t>(t))));
  }

  b.seek(13);
  CHECK(exactly_equal(b.next(), seq[13]));

  for (int t = 0; t < 2000; ++t) {
    const Vec xi = a.at(static_cast<std::uint64_t>(t));
    for (int i = 0; i < 2; ++i) {
      CHECK(xi(i) >= -0.5 * deltas(i));
      CHECK(xi(i) < 0.5 * deltas(i));
    }
  }
}

TEST_CASE("distinct trials decorrelate the dither") {
  DitherStream a(7, Vec::Constant(1, 1.0), 0);
  DitherStream b(7, Vec::Constant(1, 1.0), 1);
  int equal = 0;
  for (int t = 0; t < 100; ++t)
    if (exactly_equal(a.at(static_cast<std::uint64_t>(t)),
                      b.at(static_cast<std::uint64_t>(t))))
      ++equal;
  CHECK(equal == 0);
}

TEST_CASE("subtractive dither reconstructs within half a step") {
  const Vec deltas{{0.8, 1.7}};
  DitherStream stream(11, deltas);
  CounterRng noise(3, 0x999);

  for (int t = 0; t < 500; ++t) {
    Vec theta(2);
    theta << 3.0 * noise.gaussian(static_cast<std::uint64_t>(t), 0),
        3.0 * noise.gaussian(static_cast<std::uint64_t>(t), 1);
    const std::uint64_t pos = stream.position();
    const QuantizerOutput out = quantize_dithered(theta, stream);
    CHECK(stream.position() == pos + 1);

    for (int i = 0; i < 2; ++i) {
      const double expect =
          static_cast<double>(out.cells[static_cast<std::size_t>(i)]) *
              deltas(i) -
          out.dither(i);
      CHECK(out.reconstructed(i) == expect);
      CHECK(std::abs(out.reconstructed(i) - theta(i)) <=
            0.5 * deltas(i) + 1e-12);
    }

    const Vec again = reconstruct_cells(out.cells, out.dither, deltas);
    CHECK(exactly_equal(again, out.reconstructed));
  }
}

TEST_CASE("dimension mismatches are rejected") {
  DitherStream stream(1, Vec::Constant(1, 1.0));
  CHECK_THROWS_AS(quantize_dithered(Vec::Zero(2), stream), LengthMismatch);
  CHECK_THROWS_AS(
      reconstruct_cells({0, 1}, Vec::Zero(2), Vec::Constant(1, 1.0)),
      LengthMismatch);
  CHECK_THROWS_AS(DitherStream(0, Vec::Constant(1, -1.0)), Error);
  CHECK_THROWS_AS(DitherStream(0, Vec{}), Error);
}

TEST_CASE("quantization error is uniform and uncorrelated with the input") {
  const double delta = 0.9;
  const double sigma = 1.3;
  const int n = 20000;

  DitherStream stream(0, Vec::Constant(1, delta));
  CounterRng source(0, kStreamProcess);

  std::vector<double> err;
  err.reserve(static_cast<std::size_t>(n));
  double se = 0.0, st = 0.0, see = 0.0, stt = 0.0, set = 0.0;
  for (int t = 0; t < n; ++t) {
    const double theta =
        sigma * source.gaussian(static_cast<std::uint64_t>(t), 0);
    const QuantizerOutput out =
        quantize_dithered(Vec::Constant(1, theta), stream);
    const double e = out.reconstructed(0) - theta;
    err.push_back(e);
    se += e;
    st += theta;
    see += e * e;
    stt += theta * theta;
    set += e * theta;
  }

  const double d = ks_statistic_uniform(err, -0.5 * delta, 0.5 * delta);
  CHECK(std::sqrt(static_cast<double>(n)) * d < 1.9495);  // alpha = 0.001

  const double cov = set / n - (se / n) * (st / n);
  const double corr = cov / std::sqrt((see / n - se / n * se / n) *
                                      (stt / n - st / n * st / n));
  CHECK(std::abs(corr) < 0.02);

  // Sample variance of the error approaches delta^2 / 12.
  const double var = see / n - (se / n) * (se / n);
  CHECK(var == doctest::Approx(delta * delta / 12.0).epsilon(0.03));
}
