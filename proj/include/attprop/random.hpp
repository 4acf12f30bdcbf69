#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace attprop {

/// Counter-based generator: every draw is a pure function of (seed, counter),
/// so streams are reproducible bit-for-bit independent of the standard library.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  /// splitmix64 finalizer applied to seed and counter.
  [[nodiscard]] static std::uint64_t hash(std::uint64_t seed,
                                          std::uint64_t counter) {
    std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + counter;
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform on (0, 1].
  [[nodiscard]] double uniform(std::uint64_t counter) const {
    return static_cast<double>((hash(seed_, counter) >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller, consuming counters 2*index and 2*index+1.
  [[nodiscard]] double normal(std::uint64_t index) const {
    const double u1 = uniform(2 * index);
    const double u2 = uniform(2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform direction on the unit sphere in R^Dim; `index` selects the draw.
  template <int Dim>
  [[nodiscard]] Eigen::Matrix<double, Dim, 1> unit_sphere(
      std::uint64_t index) const {
    Eigen::Matrix<double, Dim, 1> v;
    for (;; ++index) {
      for (int i = 0; i < Dim; ++i) {
        v[i] = normal(index * Dim + static_cast<std::uint64_t>(i));
      }
      const double n = v.norm();
      if (n > 1e-12) return v / n;
    }
  }

 private:
  std::uint64_t seed_;
};

}  // namespace attprop
