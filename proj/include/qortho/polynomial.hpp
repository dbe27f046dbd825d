#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qortho/rational.hpp"

namespace qortho {

/// Dense univariate polynomial; coefficient i multiplies x^i.
///
/// Trailing zero coefficients are trimmed, so the zero polynomial has no
/// coefficients and degree() == -1. Instantiated with Rational this is the
/// exact coefficient vector used by every oracle.
template <class T>
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<T> coeffs) : coeffs_(std::move(coeffs)) { trim(); }
  Polynomial(std::initializer_list<T> coeffs) : coeffs_(coeffs) { trim(); }

  static Polynomial constant(const T& c) { return Polynomial(std::vector<T>{c}); }
  static Polynomial monomial(int degree, const T& c = T(1)) {
    std::vector<T> v(static_cast<std::size_t>(degree) + 1, T(0));
    v.back() = c;
    return Polynomial(std::move(v));
  }

  [[nodiscard]] int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  [[nodiscard]] bool is_zero() const { return coeffs_.empty(); }
  [[nodiscard]] const std::vector<T>& coefficients() const { return coeffs_; }

  /// Coefficient of x^i (zero beyond the degree).
  [[nodiscard]] T operator[](int i) const {
    if (i < 0 || i > degree()) return T(0);
    return coeffs_[static_cast<std::size_t>(i)];
  }

  [[nodiscard]] T leading() const { return is_zero() ? T(0) : coeffs_.back(); }

  /// Horner evaluation; X may differ from T (e.g. rational coefficients at a double point).
  template <class X>
  [[nodiscard]] X evaluate(const X& x) const {
    X acc(0);
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
      acc = acc * x + scalar_cast<X>(*it);
    }
    return acc;
  }
  [[nodiscard]] T operator()(const T& x) const { return evaluate<T>(x); }

  Polynomial& operator+=(const Polynomial& o) {
    if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), T(0));
    for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    trim();
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), T(0));
    for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    trim();
    return *this;
  }
  Polynomial& operator*=(const T& s) {
    for (auto& c : coeffs_) c *= s;
    trim();
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const T& s) { return a *= s; }
  friend Polynomial operator*(const T& s, Polynomial a) { return a *= s; }
  friend Polynomial operator-(Polynomial a) { return a *= T(-1); }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<T> out(a.coeffs_.size() + b.coeffs_.size() - 1, T(0));
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
    return Polynomial(std::move(out));
  }

  /// (a*x + b) * p, the building block of three-term recurrences.
  [[nodiscard]] Polynomial times_linear(const T& a, const T& b) const {
    if (is_zero()) return {};
    std::vector<T> out(coeffs_.size() + 1, T(0));
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      out[i + 1] += a * coeffs_[i];
      out[i] += b * coeffs_[i];
    }
    return Polynomial(std::move(out));
  }

  /// p(c*x).
  [[nodiscard]] Polynomial rescaled(const T& c) const {
    std::vector<T> out(coeffs_);
    T f(1);
    for (auto& v : out) {
      v *= f;
      f *= c;
    }
    return Polynomial(std::move(out));
  }

  /// p divided by its leading coefficient.
  [[nodiscard]] Polynomial monic() const {
    if (is_zero()) return {};
    Polynomial out(*this);
    const T lead = out.coeffs_.back();
    for (auto& c : out.coeffs_) c /= lead;
    return out;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs_ == b.coeffs_; }
  friend bool operator!=(const Polynomial& a, const Polynomial& b) { return !(a == b); }

  [[nodiscard]] std::string to_string() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int i = degree(); i >= 0; --i) {
      const T& c = coeffs_[static_cast<std::size_t>(i)];
      if (c == 0) continue;
      if (!first) os << " + ";
      first = false;
      os << "(" << c << ")";
      if (i > 0) os << "*x";
      if (i > 1) os << "^" << i;
    }
    return os.str();
  }

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
  }

  std::vector<T> coeffs_;
};

using RationalPoly = Polynomial<Rational>;

}  // namespace qortho
