#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace lcsg {

/// Seeded generator with a platform-independent output stream: std::mt19937_64
/// (whose sequence the standard fixes) with doubles formed from the top 53 bits
/// of each draw, u = (x >> 11) * 2^-53. No std distributions are involved, as
/// their algorithms are implementation defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Index drawn from non-negative weights (need not be normalized); the first
  /// index whose cumulative weight exceeds u * total.
  std::size_t pick(std::span<const double> weights) {
    double total = 0;
    for (double w : weights) total += w;
    const double u = uniform() * total;
    double acc = 0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0) continue;
      acc += weights[i];
      last_positive = i;
      if (u < acc) return i;
    }
    return last_positive;  // rounding at the top end
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lcsg
