// Deterministic random draws on top of std::mt19937_64. The raw generator
// sequence is pinned by the standard, and the distributions here are
// hand-rolled, so identical seeds give identical streams on any platform.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace robo {

class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) { return engine_() % n; }

  /// Standard normal via Box-Muller (one draw per call).
  double normal() {
    const double u1 = std::max(uniform01(), 0x1.0p-53);
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Exponential inter-event gap with the given rate; always positive.
  double exponential(double rate) {
    const double u = std::max(uniform01(), 0x1.0p-53);
    return -std::log(u) / rate;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace robo
