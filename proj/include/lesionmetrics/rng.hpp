#pragma once

#include <cstdint>
#include <random>

namespace lesionmetrics {

/// Seeded generator used wherever the library needs randomness.
///
/// Version 1: std::mt19937_64 seeded with the 64-bit seed. Doubles take the
/// top 53 bits of one draw (u = (x >> 11) * 2^-53); integers in [lo, hi] use
/// rejection sampling on raw draws. Unlike the std distributions, both
/// mappings are fixed here, so streams are identical on every platform.
class Rng {
 public:
  static constexpr int kVersion = 1;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(engine_());
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return lo + static_cast<std::int64_t>(x % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lesionmetrics
