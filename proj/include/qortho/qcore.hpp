#pragma once

// q-calculus primitives: brackets, factorials, Gaussian binomials and
// q-Pochhammer symbols. Finite operations are templated on the scalar so the
// same code runs on double and on exact rationals; infinite products are
// double-only and report a truncation bound alongside the value.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qortho/error.hpp"
#include "qortho/rational.hpp"

namespace qortho {

/// Value of a truncated infinite product or series together with a bound on
/// the absolute truncation error.
struct TruncatedValue {
  double value = 0.0;
  double error = 0.0;
  int terms = 0;
};

/// Deformation parameter. |q| < 1 everywhere except the documented q == 1
/// classical-limit branches.
struct QParam {
  double value;

  static QParam checked(double q, bool allow_classical = false) {
    if (!std::isfinite(q) || q <= -1.0 || q > 1.0 || (q == 1.0 && !allow_classical)) {
      throw InvalidParameter("q = " + std::to_string(q) + " outside (-1, 1)" +
                             (allow_classical ? "]" : ""));
    }
    return QParam{q};
  }
  [[nodiscard]] bool classical() const { return value == 1.0; }
};

/// S(q) = [-2/sqrt(1-q), 2/sqrt(1-q)].
struct SupportInterval {
  double lo;
  double hi;

  [[nodiscard]] bool contains(double x) const { return x >= lo && x <= hi; }
  [[nodiscard]] bool interior(double x) const { return x > lo && x < hi; }
};

inline double support_radius(double q) {
  if (!(q < 1.0) || q <= -1.0) {
    throw InvalidParameter("S(q) is only defined for -1 < q < 1 (got q = " + std::to_string(q) + ")");
  }
  return 2.0 / std::sqrt(1.0 - q);
}

inline SupportInterval support(double q) {
  const double r = support_radius(q);
  return {-r, r};
}

/// [n]_q = 1 + q + ... + q^{n-1}, [0]_q = 0.
template <class T>
T q_bracket(int n, const T& q) {
  T sum(0);
  T p(1);
  for (int i = 0; i < n; ++i) {
    sum += p;
    p *= q;
  }
  return sum;
}

/// [n]_q! = [1]_q [2]_q ... [n]_q.
template <class T>
T q_factorial(int n, const T& q) {
  T out(1);
  for (int i = 2; i <= n; ++i) out *= q_bracket<T>(i, q);
  return out;
}

/// Gaussian binomial [n k]_q; zero unless n >= k >= 0.
template <class T>
T q_binomial(int n, int k, const T& q) {
  if (k < 0 || n < k) return T(0);
  k = std::min(k, n - k);
  // Product form needs [i]_q != 0, which only fails at q = -1.
  if (q != T(-1)) {
    T num(1);
    T den(1);
    for (int i = 1; i <= k; ++i) {
      num *= q_bracket<T>(n - k + i, q);
      den *= q_bracket<T>(i, q);
    }
    return num / den;
  }
  // q-Pascal: [m j] = [m-1 j-1] + q^j [m-1 j].
  std::vector<T> row(static_cast<std::size_t>(k) + 1, T(0));
  row[0] = T(1);
  for (int m = 1; m <= n; ++m) {
    for (int j = std::min(m, k); j >= 1; --j) {
      row[static_cast<std::size_t>(j)] =
          row[static_cast<std::size_t>(j - 1)] + ipow(q, j) * row[static_cast<std::size_t>(j)];
    }
  }
  return row[static_cast<std::size_t>(k)];
}

/// [2k-1]_q!! = [1]_q [3]_q ... [2k-1]_q, equal to 1 for k = 0.
template <class T>
T q_double_factorial_odd(int k, const T& q) {
  T out(1);
  for (int i = 1; i <= k; ++i) out *= q_bracket<T>(2 * i - 1, q);
  return out;
}

/// (a; q)_n = prod_{i<n} (1 - a q^i), (a; q)_0 = 1.
template <class T>
T q_pochhammer(const T& a, const T& q, int n) {
  T out(1);
  T p(a);
  for (int i = 0; i < n; ++i) {
    out *= T(1) - p;
    p *= q;
  }
  return out;
}

/// W_n(q) = sum_i [n i]_q.
template <class T>
T rogers_szego_sum(int n, const T& q) {
  T sum(0);
  for (int i = 0; i <= n; ++i) sum += q_binomial<T>(n, i, q);
  return sum;
}

/// V_n(q, beta) = sum_i (beta)_i (beta)_{n-i} / ((q)_i (q)_{n-i}).
template <class T>
T rogers_bound_sum(int n, const T& q, const T& beta) {
  T sum(0);
  for (int i = 0; i <= n; ++i) {
    sum += q_pochhammer<T>(beta, q, i) * q_pochhammer<T>(beta, q, n - i) /
           (q_pochhammer<T>(q, q, i) * q_pochhammer<T>(q, q, n - i));
  }
  return sum;
}

/// Result of a log-space product prod_{k >= first} factor(k).
struct LogProduct {
  double log_abs = 0.0;  ///< sum of log|factor(k)|
  int sign = 1;          ///< 0 when some factor vanished exactly
  double log_error = 0.0;  ///< bound on |tail of the log-sum|
  int terms = 0;

  [[nodiscard]] double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
  /// Absolute error bound on value() implied by log_error.
  [[nodiscard]] double value_error() const { return std::abs(value()) * std::expm1(log_error); }
};

/// Default cap on the number of factors of an infinite product.
inline constexpr int kMaxProductFactors = 1000;

/// Infinite product of factors 1 + u_k with |u_k| <= amplitude * |q|^k.
///
/// Stops at the first K with amplitude |q|^K <= eps (1 - |q|) / 4, where the
/// tail |sum_{k >= K} log(1 + u_k)| <= 2 amplitude |q|^K / (1 - |q|) <= eps / 2.
template <class Factor>
LogProduct log_product(Factor&& factor, double amplitude, double q, double eps, int first = 0,
                       int cap = kMaxProductFactors) {
  const double aq = std::abs(q);
  if (!(aq < 1.0)) throw InvalidParameter("infinite product requires |q| < 1");
  if (!(eps > 0.0)) throw InvalidParameter("truncation eps must be positive");
  LogProduct out;
  const double threshold = eps * (1.0 - aq) / 4.0;
  double envelope = amplitude * std::pow(aq, first);
  int k = first;
  for (; k < first + cap; ++k) {
    if (envelope <= threshold && envelope <= 0.5) break;
    const double f = factor(k);
    if (f == 0.0) {
      out.sign = 0;
      out.terms = k - first + 1;
      return out;
    }
    if (f < 0.0) out.sign = -out.sign;
    out.log_abs += std::log(std::abs(f));
    envelope *= aq;
  }
  if (!(envelope <= threshold && envelope <= 0.5)) {
    throw Nonconvergence("infinite product did not reach eps = " + std::to_string(eps) + " within " +
                         std::to_string(cap) + " factors (|q| = " + std::to_string(aq) + ")");
  }
  out.terms = k - first;
  out.log_error = aq == 0.0 ? 0.0 : 2.0 * envelope / (1.0 - aq);
  return out;
}

/// (a; q)_infinity with absolute truncation error bounded by eps * |value| (relative).
inline TruncatedValue q_pochhammer_inf(double a, double q, double eps = 1e-15) {
  if (!(std::abs(q) < 1.0)) throw InvalidParameter("(a;q)_inf requires |q| < 1");
  const LogProduct p = log_product([&](int k) { return 1.0 - a * std::pow(q, k); }, std::abs(a), q, eps);
  return {p.value(), p.value_error(), p.terms};
}

}  // namespace qortho
