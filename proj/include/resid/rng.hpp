#pragma once

#include <cstdint>
#include <random>

namespace resid {

// Deterministic, portable random source: mt19937_64 (fully specified by the
// standard) seeded with SplitMix64(SplitMix64(seed) + stream). All draws go
// through hand-rolled conversions so two platforms produce identical
// sequences; std::*_distribution is implementation-defined and never used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(splitmix64(splitmix64(seed) + stream)) {}

  std::uint64_t next() { return engine_(); }

  // [0, 1) with 53 random bits
  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // uniform on {lo, ..., hi}, unbiased by rejection
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t range = hi - lo + 1;  // hi >= lo; full range not supported
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return lo + x % range;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace resid
