#pragma once

// Shared helpers for the unit tests: seeded random rationals and doubles.

#include <cstdint>
#include <random>

#include "qortho/rational.hpp"

namespace qtest {

/// Deterministic source of test parameters.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  /// Uniform rational p/d in (lo, hi) with denominator d <= max_den.
  qortho::Rational rational(double lo, double hi, int max_den = 17) {
    std::uniform_int_distribution<int> den(2, max_den);
    for (;;) {
      const int d = den(rng_);
      std::uniform_int_distribution<long> num(static_cast<long>(lo * d) - 1, static_cast<long>(hi * d) + 1);
      qortho::Rational r(num(rng_), d);
      r.canonicalize();
      if (r > qortho::Rational(lo) && r < qortho::Rational(hi)) return r;
    }
  }

  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace qtest
