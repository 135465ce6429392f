#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fad {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed; stream(index) is the same whether the
// other streams are ever instantiated or not.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  splitmix64(s);
  return splitmix64(s);
}

// mt19937_64 with hand-rolled transforms so draw sequences are fixed by the
// seed alone, independent of the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform01() {  // in [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  double normal() {  // Box-Muller, two uniforms per draw
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925 * u2);
  }

  // Marsaglia-Tsang; requires shape >= 1 (all callers here use shape > 2).
  double gamma(double shape) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Inverse gamma with mean 1 and the given variance; variance 0 degenerates
  // to the constant 1. Shape/scale solved from the two moments.
  double inverse_gamma_unit_mean(double variance) {
    if (variance <= 0.0) return 1.0;
    const double shape = 2.0 + 1.0 / variance;
    const double scale = shape - 1.0;
    return scale / gamma(shape);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace fad
