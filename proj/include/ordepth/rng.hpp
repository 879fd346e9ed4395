#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ordepth {

// mt19937 with hand-rolled distributions. std:: distributions are
// implementation-defined, which would break byte-identical reruns
// across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(static_cast<uint32_t>(seed)) {}

  uint32_t next_u32() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() { return gen_() * (1.0 / 4294967296.0); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n >= 1. Modulo bias is irrelevant for
  // the small ranges used here.
  uint32_t uniform_int(uint32_t n) { return gen_() % n; }

  // Box-Muller, one value per call (the pair's second half is dropped
  // to keep the state sequence simple).
  double normal() {
    double u1 = 0.0;
    while (u1 <= 1e-12) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // Fisher-Yates partial shuffle helper: picks k distinct indices out
  // of [0, n) in deterministic order.
  template <typename Vec>
  void shuffle(Vec& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = uniform_int(static_cast<uint32_t>(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937 gen_;
};

}  // namespace ordepth
