#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace mabs {

// Deterministic random source. The engine is mt19937_64 and every
// distribution mapping is implemented here rather than through
// std::*_distribution, so streams are identical across standard libraries
// and traces replay bit for bit from a seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1), 53 random mantissa bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  int uniform_index(int n) {
    if (n <= 0) throw std::invalid_argument("uniform_index: n must be positive");
    int i = static_cast<int>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  // Standard normal via Box-Muller. Uses two uniforms per draw and keeps no
  // cached spare, so the stream position is a pure function of draw count.
  double gaussian() {
    double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

  std::uint64_t raw() { return engine_(); }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::mt19937_64 engine_;
};

}  // namespace mabs
