#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "hconv/common.hpp"

namespace hconv {

/// Seeded generator with deterministic child streams. Children are derived
/// from (root seed, stream id) through splitmix64, so any partition of a
/// sampling loop reproduces the same draws regardless of execution order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(Mix(seed)) {}

  Rng Child(std::uint64_t stream) const {
    return Rng(Mix(seed_ ^ Mix(stream + 0x9E3779B97F4A7C15ULL)));
  }

  std::uint64_t seed() const { return seed_; }

  double Uniform(double lo = 0.0, double hi = 1.0) {
    // 53 random mantissa bits; independent of the standard library's
    // distribution implementations.
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  double Normal() {
    // Box-Muller on our own uniforms for cross-platform reproducibility.
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  int Index(int n) { return static_cast<int>(Uniform() * n) % n; }

  VectorXd NormalVector(int dim) {
    VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = Normal();
    return v;
  }

  VectorXd UniformVector(int dim, double lo, double hi) {
    VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = Uniform(lo, hi);
    return v;
  }

 private:
  static std::uint64_t Mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hconv
