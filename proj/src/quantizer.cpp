#include "ratelqg/quantizer.hpp"

#include <cmath>

#include "ratelqg/errors.hpp"

namespace rlqg {

QuantizedScalar quantize_uniform(double x, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw Error("quantize_uniform: step size must be positive and finite");
  if (!std::isfinite(x)) throw NonFinite("quantize_uniform: non-finite input");
  QuantizedScalar out;
  out.index = static_cast<std::int64_t>(std::floor(x / delta + 0.5));
  out.value = static_cast<double>(out.index) * delta;
  return out;
}

DitherStream::DitherStream(std::uint64_t seed, Vec step_sizes,
                           std::uint64_t trial)
    : rng_(seed, kStreamDither, trial), steps_(std::move(step_sizes)) {
  if (steps_.size() == 0)
    throw Error("DitherStream: at least one component required");
  for (int i = 0; i < steps_.size(); ++i)
    if (!(steps_[i] > 0.0) || !std::isfinite(steps_[i]))
      throw Error("DitherStream: step sizes must be positive and finite");
}

Vec DitherStream::at(std::uint64_t t) const {
  Vec xi(steps_.size());
  for (int i = 0; i < steps_.size(); ++i)
    xi[i] = rng_.uniform_centered(0.5 * steps_[i], t,
                                  static_cast<std::uint64_t>(i));
  return xi;
}

Vec DitherStream::next() {
  Vec xi = at(pos_);
  ++pos_;
  return xi;
}

QuantizerOutput quantize_dithered(const Vec& theta, DitherStream& stream) {
  if (theta.size() != stream.step_sizes().size())
    throw LengthMismatch("quantize_dithered: theta length does not match "
                         "the stream's component count");
  QuantizerOutput out;
  out.dither = stream.next();
  out.cells.resize(theta.size());
  out.reconstructed.resize(theta.size());
  const Vec& delta = stream.step_sizes();
  for (int i = 0; i < theta.size(); ++i) {
    const QuantizedScalar q = quantize_uniform(theta[i] + out.dither[i],
                                               delta[i]);
    out.cells[static_cast<std::size_t>(i)] = q.index;
    out.reconstructed[i] = q.value - out.dither[i];
  }
  return out;
}

Vec reconstruct_cells(const std::vector<std::int64_t>& cells, const Vec& xi,
                      const Vec& step_sizes) {
  if (static_cast<int>(cells.size()) != step_sizes.size() ||
      xi.size() != step_sizes.size())
    throw LengthMismatch("reconstruct_cells: length mismatch");
  Vec q(step_sizes.size());
  for (int i = 0; i < step_sizes.size(); ++i)
    q[i] = static_cast<double>(cells[static_cast<std::size_t>(i)]) *
               step_sizes[i] - xi[i];
  return q;
}

}  // namespace rlqg
