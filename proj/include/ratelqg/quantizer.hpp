#pragma once

#include <cstdint>
#include <vector>

#include "ratelqg/matrix_kernel.hpp"
#include "ratelqg/rng.hpp"

namespace rlqg {

struct QuantizedScalar {
  std::int64_t index = 0;
  double value = 0.0;
};

// Uniform mid-rise-free lattice: index = floor(x / delta + 1/2), cells are
// half-open [k*delta - delta/2, k*delta + delta/2), upper edges round up.
QuantizedScalar quantize_uniform(double x, double delta);

// Reproducible per-step dither, component i uniform on [-delta_i/2, +delta_i/2).
// Dither for step t is a pure function of (seed, t, i): the stream supports
// random access and replays identically on encoder and decoder.
class DitherStream {
 public:
  DitherStream(std::uint64_t seed, Vec step_sizes, std::uint64_t trial = 0);

  const Vec& step_sizes() const { return steps_; }
  std::uint64_t position() const { return pos_; }

  Vec at(std::uint64_t t) const;
  Vec peek() const { return at(pos_); }
  Vec next();
  void seek(std::uint64_t t) { pos_ = t; }

 private:
  CounterRng rng_;
  Vec steps_;
  std::uint64_t pos_ = 0;
};

struct QuantizerOutput {
  std::vector<std::int64_t> cells;
  Vec reconstructed;  // cells .* delta - xi; equals theta + lattice noise
  Vec dither;
};

// Subtractive dithered quantization of one innovation vector. Advances the
// stream by one step.
QuantizerOutput quantize_dithered(const Vec& theta, DitherStream& stream);

// Decoder side: rebuild q from transmitted cells and the shared dither.
Vec reconstruct_cells(const std::vector<std::int64_t>& cells, const Vec& xi,
                      const Vec& step_sizes);

}  // namespace rlqg
