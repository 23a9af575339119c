#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>

namespace tcinet {

/// Seedable mt19937_64 stream with platform-independent variate generation.
///
/// Streams are split by seed offset: trajectory i of an experiment with base seed s
/// draws from Rng(s + i), and the optimizer of the same dataset from Rng(s + 1000000 + i).
class Rng {
 public:
  static constexpr std::uint64_t kOptimizerStreamOffset = 1'000'000;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on {0, ..., n-1}; n must be positive.
  std::size_t below(std::size_t n) {
    // rejection keeps the draw unbiased
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r = engine_();
    while (r >= limit) r = engine_();
    return static_cast<std::size_t>(r % bound);
  }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tcinet
