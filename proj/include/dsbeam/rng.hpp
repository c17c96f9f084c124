// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace dsbeam {

// SplitMix64 finalizer; used to hash (seed, counter...) tuples into fresh
// stream seeds so independent work items never share an engine state.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  std::uint64_t x = mix64(master);
  x = mix64(x ^ (a + 0x9E3779B97F4A7C15ull));
  x = mix64(x ^ (b + 0xC2B2AE3D27D4EB4Full));
  x = mix64(x ^ (c + 0x165667B19E3779F9ull));
  return x;
}

/// Deterministic random stream: a std::mt19937_64 engine (bit-exact by the
/// standard) combined with hand-rolled scalar transforms, so equal seeds give
/// equal draws on every conforming platform.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  RandomStream child(std::uint64_t a, std::uint64_t b = 0) const {
    return RandomStream(derive_seed(seed_, a, b));
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Modulo bias is below 2^-53 for the n used here.
  int uniform_int(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }

  /// Standard normal via Box-Muller; consumes two uniform draws.
  double normal() {
    const double u = 1.0 - uniform();  // (0, 1]
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
  }

  /// CN(0,1): real and imaginary parts i.i.d. N(0, 1/2).
  std::complex<double> complex_normal() {
    const double u = 1.0 - uniform();
    const double v = uniform();
    const double r = std::sqrt(-std::log(u));
    return {r * std::cos(2.0 * std::numbers::pi * v), r * std::sin(2.0 * std::numbers::pi * v)};
  }

  /// Zero-mean Laplacian with the given scale b (standard deviation b*sqrt(2)),
  /// by inverse CDF.
  double laplacian(double scale) {
    double t = uniform();
    if (t <= 0.0) t = 0x1.0p-64;
    const double u = t - 0.5;
    return u < 0.0 ? scale * std::log1p(2.0 * u) : -scale * std::log1p(-2.0 * u);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace dsbeam
