#pragma once

// Self-contained RNG + distributions. We deliberately avoid
// std::uniform_real_distribution etc. because their output is not pinned by
// the standard; trial streams must be bit-identical across compilers and
// thread counts.

#include <cmath>
#include <cstdint>
#include <random>

namespace collusim {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n); modulo bias is ~2^-53 for our tiny n
  int uniform_int(int n) { return static_cast<int>(eng_() % static_cast<std::uint64_t>(n)); }

  double normal(double mean = 0.0, double sd = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + sd * spare_;
    }
    // Marsaglia polar
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return mean + sd * u * f;
  }

  // Marsaglia–Tsang; valid for shape > 0
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace collusim
