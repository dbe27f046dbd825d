#pragma once

#include <gmpxx.h>

#include <cmath>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>

#include "qortho/error.hpp"

namespace qortho {

/// Arbitrary-precision rational; the currency of every exact (oracle) path.
using Rational = mpq_class;

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.get_d(); }

/// Conversion between the two scalar backends (double <-> Rational).
template <class To, class From>
To scalar_cast(const From& v) {
  if constexpr (std::is_same_v<To, double> && std::is_same_v<From, Rational>) {
    return v.get_d();
  } else {
    return To(v);
  }
}

/// base^e for e >= 0 with 0^0 == 1 (the convention every q-formula relies on).
template <class T>
T ipow(const T& base, long long e) {
  T result(1);
  T b(base);
  while (e > 0) {
    if (e & 1) result *= b;
    e >>= 1;
    if (e > 0) b *= b;
  }
  return result;
}

/// (-1)^k as a scalar.
template <class T>
T sign_pow(long long k) {
  return (k % 2 == 0) ? T(1) : T(-1);
}

/// Parses "p/q" or an integer literal into an exact rational. Decimal literals
/// are refused: they name binary floating-point values, not rationals.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty() || s.find_first_of(".eE") != std::string::npos) {
    throw IrrationalParameter("not an exact rational literal: '" + s + "'");
  }
  if (!s.empty() && s.front() == '+') s.erase(0, 1);
  Rational r;
  if (r.set_str(s, 10) != 0) {
    throw IrrationalParameter("malformed rational literal: '" + std::string(text) + "'");
  }
  if (r.get_den() == 0) throw InvalidParameter("zero denominator in '" + std::string(text) + "'");
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& r) { return r.get_str(); }

/// Exact conversion of a double to the rational it represents.
inline Rational exact_from_double(double x) {
  if (!std::isfinite(x)) throw InvalidParameter("non-finite value");
  return Rational(x);
}

/// A numeric literal as typed by a user: exact when written as "p/q" or an
/// integer, binary floating point when written in decimal.
class Scalar {
 public:
  Scalar() = default;
  explicit Scalar(double v) : v_(v) {}
  explicit Scalar(Rational v) : v_(std::move(v)) {}

  static Scalar parse(std::string_view text) {
    std::string s(text);
    if (s.find_first_of(".eEinIN") != std::string::npos) {
      std::size_t used = 0;
      double d = 0.0;
      try {
        d = std::stod(s, &used);
      } catch (const std::exception&) {
        throw InvalidParameter("malformed number '" + s + "'");
      }
      if (used != s.size()) throw InvalidParameter("malformed number '" + s + "'");
      return Scalar(d);
    }
    return Scalar(parse_rational(s));
  }

  [[nodiscard]] bool exact() const { return std::holds_alternative<Rational>(v_); }
  [[nodiscard]] double as_double() const {
    return exact() ? std::get<Rational>(v_).get_d() : std::get<double>(v_);
  }
  /// Throws IrrationalParameter for floating-point literals.
  [[nodiscard]] Rational as_exact() const {
    if (!exact()) {
      throw IrrationalParameter("floating-point value " + std::to_string(std::get<double>(v_)) +
                                " passed to the exact path; write it as p/q");
    }
    return std::get<Rational>(v_);
  }

 private:
  std::variant<double, Rational> v_{0.0};
};

}  // namespace qortho
