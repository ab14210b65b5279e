#pragma once

#include <cmath>
#include <cstdint>

namespace rlqg {

// splitmix64 finalizer. Fixed integer mixing, identical on every platform.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kStreamDither = 0x6449;
inline constexpr std::uint64_t kStreamProcess = 0x7750;
inline constexpr std::uint64_t kStreamInit = 0x4930;

// Counter-based generator: every draw is a pure function of
// (seed, stream, trial, step, lane, draw). No state advances, so draws can
// be evaluated in any order or in parallel and still agree bit for bit.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t trial = 0)
      : base_(mix64(mix64(mix64(seed) ^ stream) ^ trial)) {}

  std::uint64_t bits(std::uint64_t step, std::uint64_t lane,
                     std::uint64_t draw = 0) const {
    return mix64(mix64(mix64(base_ ^ step) ^ lane) ^ draw);
  }

  // Uniform on [0, 1) from the top 53 bits.
  double u01(std::uint64_t step, std::uint64_t lane,
             std::uint64_t draw = 0) const {
    return static_cast<double>(bits(step, lane, draw) >> 11) * 0x1p-53;
  }

  // Uniform on [-half, half).
  double uniform_centered(double half, std::uint64_t step, std::uint64_t lane,
                          std::uint64_t draw = 0) const {
    return (2.0 * u01(step, lane, draw) - 1.0) * half;
  }

  // Standard normal by the polar method; rejected pairs advance the draw
  // counter, so the value depends only on (step, lane).
  double gaussian(std::uint64_t step, std::uint64_t lane) const {
    for (std::uint64_t attempt = 0;; ++attempt) {
      const double u = 2.0 * u01(step, lane, 2 * attempt) - 1.0;
      const double v = 2.0 * u01(step, lane, 2 * attempt + 1) - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

 private:
  std::uint64_t base_;
};

}  // namespace rlqg
