#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace onlp {

/// Seedable, splittable 64-bit stream over std::mt19937_64.
///
/// The integer-to-real and bounded-integer conversions are spelled out here
/// instead of going through <random> distributions, whose algorithms are
/// implementation-defined; with this class a seed fixes the exact sequence
/// of values on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1): ((x >> 11) + 0.5) * 2^-53.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, bound) by rejection of the biased tail.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

  /// Standard normal via Box-Muller on two uniform01 draws.
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  /// Child stream seeded from the next draw of this one.
  Rng split() { return Rng(next_u64()); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace onlp
