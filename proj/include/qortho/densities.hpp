#pragma once

// The six densities on S(q): q-Normal, conditional q-Normal, q-ultraspherical,
// semicircle, arcsine and Kesten--McKay. Infinite products are accumulated in
// log space; every evaluation carries a bound on its truncation error.

#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qortho/error.hpp"
#include "qortho/qcore.hpp"
#include "qortho/quadrature.hpp"

namespace qortho {

enum class DensityTag { N, CN, R, U, T, K };

inline const char* density_name(DensityTag t) {
  switch (t) {
    case DensityTag::N: return "N";
    case DensityTag::CN: return "CN";
    case DensityTag::R: return "R";
    case DensityTag::U: return "U";
    case DensityTag::T: return "T";
    case DensityTag::K: return "K";
  }
  return "?";
}

inline DensityTag parse_density(const std::string& s) {
  std::string lower;
  for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "n" || lower == "fn" || lower == "normal") return DensityTag::N;
  if (lower == "cn" || lower == "fcn" || lower == "conditional") return DensityTag::CN;
  if (lower == "r" || lower == "fr" || lower == "rogers") return DensityTag::R;
  if (lower == "u" || lower == "fu" || lower == "semicircle") return DensityTag::U;
  if (lower == "t" || lower == "ft" || lower == "arcsine") return DensityTag::T;
  if (lower == "k" || lower == "fk" || lower == "kesten") return DensityTag::K;
  throw InvalidParameter("unknown density '" + s + "'");
}

/// Default relative truncation tolerance for the infinite products.
inline constexpr double kDefaultTruncEps = 1e-14;

/// One of the six densities with its parameters. Unused parameters stay 0.
struct DensityId {
  DensityTag tag = DensityTag::N;
  double q = 0.0;
  double y = 0.0;
  double rho = 0.0;
  double beta = 0.0;
  double trunc_eps = kDefaultTruncEps;

  static DensityId normal(double q) { return make({DensityTag::N, q, 0, 0, 0}); }
  static DensityId conditional(double y, double rho, double q) { return make({DensityTag::CN, q, y, rho, 0}); }
  static DensityId rogers(double beta, double q) { return make({DensityTag::R, q, 0, 0, beta}); }
  static DensityId semicircle(double q) { return make({DensityTag::U, q, 0, 0, 0}); }
  static DensityId arcsine(double q) { return make({DensityTag::T, q, 0, 0, 0}); }
  static DensityId kesten(double y, double rho, double q) { return make({DensityTag::K, q, y, rho, 0}); }

  [[nodiscard]] DensityId with_eps(double eps) const {
    DensityId d = *this;
    d.trunc_eps = eps;
    d.validate();
    return d;
  }

  /// fN and fCN admit q = 1 (Gaussian branches); everything else needs -1 < q < 1.
  [[nodiscard]] bool classical() const { return q == 1.0; }

  void validate() const {
    const bool gaussian_ok = tag == DensityTag::N || tag == DensityTag::CN;
    QParam::checked(q, gaussian_ok);
    if (!(trunc_eps > 0.0)) throw InvalidParameter("trunc_eps must be positive");
    if ((tag == DensityTag::CN || tag == DensityTag::K) && !(std::abs(rho) < 1.0)) {
      throw InvalidParameter("|rho| < 1 required");
    }
    // beta = 1 is the arcsine limit of fR
    if (tag == DensityTag::R && !(beta > -1.0 && beta <= 1.0)) throw InvalidParameter("beta must lie in (-1, 1]");
    if ((tag == DensityTag::CN || tag == DensityTag::K) && !classical() && !support(q).contains(y)) {
      throw SupportViolation("conditioning point y = " + std::to_string(y) + " outside S(q)");
    }
  }

 private:
  static DensityId make(DensityId d) {
    d.validate();
    return d;
  }
};

namespace detail {

/// Accumulates factors of a density in log space.
struct LogAccumulator {
  double log_abs = 0.0;
  double log_error = 0.0;
  bool zero = false;

  void multiply(const LogProduct& p, int power = 1) {
    if (p.sign == 0) {
      if (power > 0) zero = true;
      else throw DivisionAtBoundary("vanishing denominator factor");
      return;
    }
    if (p.sign < 0) throw InvalidParameter("negative factor in a density product");
    log_abs += power * p.log_abs;
    log_error += p.log_error;
  }
  void multiply(double v) {
    if (v == 0.0) {
      zero = true;
      return;
    }
    log_abs += std::log(std::abs(v));
  }
  [[nodiscard]] TruncatedValue result(int terms) const {
    if (zero) return {0.0, 0.0, terms};
    const double v = std::exp(log_abs);
    return {v, v * std::expm1(log_error), terms};
  }
};

inline LogProduct pochhammer_log(double a, double q, double eps) {
  return log_product([&](int k) { return 1.0 - a * std::pow(q, k); }, std::abs(a), q, eps);
}

/// prod_{k >= first} ((1+q^k)^2 - (1-q) x^2 q^k).
inline LogProduct normal_factors(double x, double q, double eps, int first) {
  const double w = (1.0 - q) * x * x;
  return log_product(
      [&](int k) {
        const double qk = std::pow(q, k);
        return (1.0 + qk) * (1.0 + qk) - w * qk;
      },
      3.0, q, eps, first);
}

/// prod_{k >= 0} of the conditional-normal denominator.
inline LogProduct conditional_factors(double x, double y, double rho, double q, double eps) {
  const double s = 1.0 - q;
  const double r2 = rho * rho;
  const double amp = 2.0 * r2 + r2 * r2 + 4.0 * std::abs(rho) * (1.0 + r2) + 8.0 * r2;
  return log_product(
      [&](int k) {
        const double qk = std::pow(q, k);
        const double q2k = qk * qk;
        const double a = 1.0 - r2 * q2k;
        return a * a - s * rho * qk * (1.0 + r2 * q2k) * x * y + s * r2 * (x * x + y * y) * q2k;
      },
      amp, q, eps);
}

/// prod_{k >= 0} ((1 + beta q^k)^2 - (1-q) beta x^2 q^k).
inline LogProduct rogers_factors(double x, double beta, double q, double eps) {
  const double w = (1.0 - q) * x * x;
  const double ab = std::abs(beta);
  return log_product(
      [&](int k) {
        const double bq = beta * std::pow(q, k);
        return (1.0 + bq) * (1.0 + bq) - w * bq;
      },
      6.0 * ab + ab * ab, q, eps);
}

/// (beta^2;q)_inf / ((beta;q)_inf (beta q;q)_inf), with the k = 0 quotient
/// (1 - beta^2)/(1 - beta) folded into 1 + beta so beta -> 1 stays finite.
inline void rogers_constant(LogAccumulator& acc, double beta, double q, double eps) {
  acc.multiply(1.0 + beta);
  const double b2 = beta * beta;
  acc.multiply(log_product([&](int k) { return (1.0 - b2 * std::pow(q, k)) / (1.0 - beta * std::pow(q, k)); },
                           2.0 * (std::abs(beta) + b2) / (1.0 - std::abs(beta * q) + 1e-300), q, eps, 1));
  acc.multiply(log_product([&](int k) { return 1.0 - beta * std::pow(q, k); }, std::abs(beta), q, eps, 1), -1);
}

inline double semicircle_root(double x, double q) { return std::sqrt(std::max(0.0, 4.0 - (1.0 - q) * x * x)); }

inline double gaussian(double x, double mean, double var) {
  return std::exp(-(x - mean) * (x - mean) / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

}  // namespace detail

/// Density value with a bound on the truncation error of its products.
///
/// `root` may carry sqrt(4 - (1-q) x^2) computed more accurately than from x
/// itself (quadrature nodes know it as 2 sin(theta)); NaN means "compute it".
inline TruncatedValue density_eval_bounded(const DensityId& d, double x,
                                           double root_hint = std::numeric_limits<double>::quiet_NaN()) {
  d.validate();
  const double q = d.q;
  // at most four truncated products per density share the budget
  const double eps = d.trunc_eps / 4.0;
  if (d.classical()) {
    if (d.tag == DensityTag::N) return {detail::gaussian(x, 0.0, 1.0), 0.0, 0};
    return {detail::gaussian(x, d.rho * d.y, 1.0 - d.rho * d.rho), 0.0, 0};
  }
  const SupportInterval s = support(q);
  if (!s.contains(x)) return {0.0, 0.0, 0};
  const double root = std::isnan(root_hint) ? detail::semicircle_root(x, q) : root_hint;
  const double sq = std::sqrt(1.0 - q);
  const double pi = std::numbers::pi;
  if (!s.interior(x)) {
    if (d.tag == DensityTag::T || (d.tag == DensityTag::R && d.beta == 1.0)) {
      return {std::numeric_limits<double>::infinity(), 0.0, 0};
    }
    return {0.0, 0.0, 0};
  }
  detail::LogAccumulator acc;
  int terms = 0;
  const auto mul = [&](const LogProduct& p, int power = 1) {
    acc.multiply(p, power);
    terms += p.terms;
  };
  switch (d.tag) {
    case DensityTag::U:
      return {sq * root / (2.0 * pi), 0.0, 0};
    case DensityTag::T:
      return {sq / (pi * root), 0.0, 0};
    case DensityTag::K: {
      const double r2 = d.rho * d.rho;
      const double den = (1.0 - r2) * (1.0 - r2) - d.rho * (1.0 - q) * (1.0 + r2) * x * d.y +
                         (1.0 - q) * r2 * (x * x + d.y * d.y);
      return {(1.0 - r2) * sq * root / (2.0 * pi * den), 0.0, 0};
    }
    case DensityTag::N:
      acc.multiply(sq * root / (2.0 * pi));
      mul(detail::pochhammer_log(q, q, eps));
      mul(detail::normal_factors(x, q, eps, 1));
      break;
    case DensityTag::CN:
      acc.multiply(sq * root / (2.0 * pi));
      mul(detail::pochhammer_log(d.rho * d.rho, q, eps));
      mul(detail::pochhammer_log(q, q, eps));
      mul(detail::normal_factors(x, q, eps, 1));
      mul(detail::conditional_factors(x, d.y, d.rho, q, eps), -1);
      break;
    case DensityTag::R:
      if (d.beta == 1.0) return {sq / (pi * root), 0.0, 0};
      acc.multiply(sq * root / (2.0 * pi));
      mul(detail::pochhammer_log(q, q, eps));
      detail::rogers_constant(acc, d.beta, q, eps);
      mul(detail::normal_factors(x, q, eps, 1));
      mul(detail::rogers_factors(x, d.beta, q, eps), -1);
      break;
  }
  return acc.result(terms);
}

inline double density_eval(const DensityId& d, double x) { return density_eval_bounded(d, x).value; }
inline double density_eval(const DensityId& d, double x, double root) { return density_eval_bounded(d, x, root).value; }

/// num(x) / den(x). Closed-form merged products are used for fCN/fN, fR/fN,
/// fN/fU and fCN(.|x)/fR; other pairs fall back to the quotient of evaluations.
inline TruncatedValue density_ratio_bounded(const DensityId& num, const DensityId& den, double x) {
  num.validate();
  den.validate();
  const double q = den.q;
  if (den.classical() || num.q != den.q) {
    const TruncatedValue a = density_eval_bounded(num, x);
    const TruncatedValue b = density_eval_bounded(den, x);
    if (!(b.value > 0.0)) throw DivisionAtBoundary("denominator density vanishes at x");
    return {a.value / b.value, (a.error + std::abs(a.value / b.value) * b.error) / b.value, a.terms + b.terms};
  }
  if (!support(q).interior(x)) {
    throw DivisionAtBoundary("density ratio requested at x = " + std::to_string(x) + " outside the open support");
  }
  const double eps = den.trunc_eps / 4.0;
  detail::LogAccumulator acc;
  int terms = 0;
  const auto mul = [&](const LogProduct& p, int power = 1) {
    acc.multiply(p, power);
    terms += p.terms;
  };
  if (num.tag == DensityTag::CN && den.tag == DensityTag::N) {
    mul(detail::pochhammer_log(num.rho * num.rho, q, eps));
    mul(detail::conditional_factors(x, num.y, num.rho, q, eps), -1);
    return acc.result(terms);
  }
  if (num.tag == DensityTag::R && den.tag == DensityTag::N && num.beta < 1.0) {
    detail::rogers_constant(acc, num.beta, q, eps);
    mul(detail::rogers_factors(x, num.beta, q, eps), -1);
    return acc.result(terms);
  }
  if (num.tag == DensityTag::N && den.tag == DensityTag::U) {
    mul(detail::pochhammer_log(q, q, eps));
    mul(detail::normal_factors(x, q, eps, 1));
    return acc.result(terms);
  }
  if (num.tag == DensityTag::CN && den.tag == DensityTag::R && num.y == x && num.rho == den.beta) {
    // (rho)_inf (rho q)_inf prod_k rogers_k / conditional_k
    const double rho = num.rho;
    mul(detail::pochhammer_log(rho, q, eps));
    mul(detail::pochhammer_log(rho * q, q, eps));
    mul(detail::rogers_factors(x, rho, q, eps));
    mul(detail::conditional_factors(x, x, rho, q, eps), -1);
    return acc.result(terms);
  }
  const TruncatedValue a = density_eval_bounded(num, x);
  const TruncatedValue b = density_eval_bounded(den, x);
  if (!(b.value > 0.0) || !std::isfinite(b.value)) throw DivisionAtBoundary("denominator density vanishes at x");
  return {a.value / b.value, (a.error + std::abs(a.value / b.value) * b.error) / b.value, a.terms + b.terms};
}

inline double density_ratio(const DensityId& num, const DensityId& den, double x) {
  return density_ratio_bounded(num, den, x).value;
}

/// |integral of d over S(q) - 1|.
inline double normalize_check(const DensityId& d, double tol = 1e-13) {
  if (d.classical()) throw InvalidParameter("normalize_check needs q < 1");
  QuadratureOptions opt;
  opt.tol = tol;
  const QuadratureResult r = integrate([&](double x, double root) { return density_eval(d, x, root); }, d.q, opt);
  return std::abs(r.value - 1.0);
}

}  // namespace qortho
