#pragma once

// Polynomial families defined by three-term recurrences
//
//   p_{n+1}(x) = (a_n x + b_n) p_n(x) - c_n p_{n-1}(x),   p_{-1} = 0, p_0 = 1.
//
// Every family is templated on its parameter type: Family<double> drives the
// floating-point evaluators, Family<Rational> the exact coefficient path.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qortho/error.hpp"
#include "qortho/polynomial.hpp"
#include "qortho/qcore.hpp"
#include "qortho/rational.hpp"

namespace qortho {

enum class FamilyTag {
  QHermite,          ///< H_n(x|q)
  Rogers,            ///< R_n(x|beta,q), q-ultraspherical
  ASC,               ///< P_n(x|y,rho,q), Al-Salam--Chihara
  BigB,              ///< B_n(y|q)
  ChebT,             ///< T_n(x)
  ChebU,             ///< U_n(x)
  ChebTHat,          ///< T_n(x sqrt(1-q)/2) / (1-q)^{n/2}
  ChebUHat,          ///< U_n(x sqrt(1-q)/2) / (1-q)^{n/2}, monic
  ClassicalHermite,  ///< probabilists' He_n(x)
  Kesten,            ///< k_n(x|y,rho)
  KestenHat,         ///< k_n(x sqrt(1-q)|y sqrt(1-q),rho) / (1-q)^{n/2}, monic
};

inline const char* family_name(FamilyTag t) {
  switch (t) {
    case FamilyTag::QHermite: return "qhermite";
    case FamilyTag::Rogers: return "rogers";
    case FamilyTag::ASC: return "asc";
    case FamilyTag::BigB: return "bigb";
    case FamilyTag::ChebT: return "chebt";
    case FamilyTag::ChebU: return "chebu";
    case FamilyTag::ChebTHat: return "chebt-hat";
    case FamilyTag::ChebUHat: return "chebu-hat";
    case FamilyTag::ClassicalHermite: return "hermite";
    case FamilyTag::Kesten: return "kesten";
    case FamilyTag::KestenHat: return "kesten-hat";
  }
  return "?";
}

inline FamilyTag parse_family(const std::string& name) {
  for (FamilyTag t : {FamilyTag::QHermite, FamilyTag::Rogers, FamilyTag::ASC, FamilyTag::BigB,
                      FamilyTag::ChebT, FamilyTag::ChebU, FamilyTag::ChebTHat, FamilyTag::ChebUHat,
                      FamilyTag::ClassicalHermite, FamilyTag::Kesten, FamilyTag::KestenHat}) {
    if (name == family_name(t)) return t;
  }
  throw InvalidParameter("unknown family '" + name + "'");
}

/// A polynomial family together with its parameters. Unused parameters stay 0.
template <class T>
struct Family {
  FamilyTag tag = FamilyTag::QHermite;
  T q = T(0);
  T beta = T(0);
  T rho = T(0);
  T y = T(0);

  static Family qhermite(T q) { return make(FamilyTag::QHermite, q, T(0), T(0), T(0)); }
  static Family rogers(T beta, T q) { return make(FamilyTag::Rogers, q, beta, T(0), T(0)); }
  static Family asc(T y, T rho, T q) { return make(FamilyTag::ASC, q, T(0), rho, y); }
  static Family big_b(T q) { return make(FamilyTag::BigB, q, T(0), T(0), T(0)); }
  static Family cheb_t() { return make(FamilyTag::ChebT, T(0), T(0), T(0), T(0)); }
  static Family cheb_u() { return make(FamilyTag::ChebU, T(0), T(0), T(0), T(0)); }
  static Family cheb_t_hat(T q) { return make(FamilyTag::ChebTHat, q, T(0), T(0), T(0)); }
  static Family cheb_u_hat(T q) { return make(FamilyTag::ChebUHat, q, T(0), T(0), T(0)); }
  static Family classical_hermite() { return make(FamilyTag::ClassicalHermite, T(1), T(0), T(0), T(0)); }
  static Family kesten(T y, T rho) { return make(FamilyTag::Kesten, T(0), T(0), rho, y); }
  static Family kesten_hat(T y, T rho, T q) { return make(FamilyTag::KestenHat, q, T(0), rho, y); }

  /// Throws InvalidParameter unless the parameters are in range.
  void validate() const {
    const auto bad = [&](const char* what) {
      throw InvalidParameter(std::string(family_name(tag)) + ": " + what + " out of range");
    };
    const auto abs_lt_1 = [](const T& v) { return v < T(1) && v > T(-1); };
    const auto abs_le_1 = [](const T& v) { return v <= T(1) && v >= T(-1); };
    switch (tag) {
      case FamilyTag::QHermite:
      case FamilyTag::BigB:
        if (!abs_le_1(q)) bad("q");
        break;
      case FamilyTag::Rogers:
        if (!abs_le_1(q)) bad("q");
        if (!abs_lt_1(beta)) bad("beta");
        break;
      case FamilyTag::ASC:
        if (!abs_le_1(q)) bad("q");
        if (!abs_lt_1(rho)) bad("rho");
        break;
      case FamilyTag::ChebTHat:
      case FamilyTag::ChebUHat:
        if (!(q < T(1) && q >= T(-1))) bad("q");
        break;
      case FamilyTag::KestenHat:
        if (!(q < T(1) && q >= T(-1))) bad("q");
        if (!abs_lt_1(rho)) bad("rho");
        break;
      case FamilyTag::Kesten:
        if (!abs_lt_1(rho)) bad("rho");
        break;
      case FamilyTag::ChebT:
      case FamilyTag::ChebU:
      case FamilyTag::ClassicalHermite:
        break;
    }
  }

  /// The ASC q = 1 member is the Gaussian closed form, not the recurrence.
  [[nodiscard]] bool classical_asc() const { return tag == FamilyTag::ASC && q == T(1); }

 private:
  static Family make(FamilyTag t, T q_, T beta_, T rho_, T y_) {
    Family f;
    f.tag = t;
    f.q = std::move(q_);
    f.beta = std::move(beta_);
    f.rho = std::move(rho_);
    f.y = std::move(y_);
    f.validate();
    return f;
  }
};

/// Family<Rational> from a Family<double>, converting each parameter exactly.
inline Family<Rational> exact_family(const Family<double>& f) {
  Family<Rational> out;
  out.tag = f.tag;
  out.q = exact_from_double(f.q);
  out.beta = exact_from_double(f.beta);
  out.rho = exact_from_double(f.rho);
  out.y = exact_from_double(f.y);
  return out;
}

inline Family<double> float_family(const Family<Rational>& f) {
  Family<double> out;
  out.tag = f.tag;
  out.q = f.q.get_d();
  out.beta = f.beta.get_d();
  out.rho = f.rho.get_d();
  out.y = f.y.get_d();
  return out;
}

/// Recurrence coefficients (a_n, b_n, c_n) for the step p_n -> p_{n+1}.
template <class T>
struct Step {
  T a;
  T b;
  T c;
};

template <class T>
Step<T> recurrence_step(const Family<T>& f, int n) {
  const T zero(0);
  const T one(1);
  switch (f.tag) {
    case FamilyTag::QHermite:
      return {one, zero, q_bracket<T>(n, f.q)};
    case FamilyTag::Rogers: {
      const T qn = ipow(f.q, n);
      if (n == 0) return {one - f.beta, zero, zero};
      return {T(one - f.beta * qn), zero, T((one - f.beta * f.beta * ipow(f.q, n - 1)) * q_bracket<T>(n, f.q))};
    }
    case FamilyTag::ASC: {
      const T b = -f.rho * f.y * ipow(f.q, n);
      if (n == 0) return {one, b, zero};
      return {one, b, T((one - f.rho * f.rho * ipow(f.q, n - 1)) * q_bracket<T>(n, f.q))};
    }
    case FamilyTag::BigB: {
      const T a = -ipow(f.q, n);
      if (n == 0) return {a, zero, zero};
      return {a, zero, T(-ipow(f.q, n - 1) * q_bracket<T>(n, f.q))};
    }
    case FamilyTag::ChebT:
      return n == 0 ? Step<T>{one, zero, zero} : Step<T>{T(2), zero, one};
    case FamilyTag::ChebU:
      return {T(2), zero, n == 0 ? zero : one};
    case FamilyTag::ChebTHat:
      return n == 0 ? Step<T>{T(one / T(2)), zero, zero} : Step<T>{one, zero, T(one / (one - f.q))};
    case FamilyTag::ChebUHat:
      return {one, zero, n == 0 ? zero : T(one / (one - f.q))};
    case FamilyTag::ClassicalHermite:
      return {one, zero, T(n)};
    case FamilyTag::Kesten:
      if (n == 0) return {one, T(-f.rho * f.y), zero};
      if (n == 1) return {one, zero, T(one - f.rho * f.rho)};
      return {one, zero, one};
    case FamilyTag::KestenHat:
      if (n == 0) return {one, T(-f.rho * f.y), zero};
      if (n == 1) return {one, zero, T((one - f.rho * f.rho) / (one - f.q))};
      return {one, zero, T(one / (one - f.q))};
  }
  throw InvalidParameter("unknown family tag");
}

namespace detail {

/// He_k(z) for k = 0..n_max.
template <class X>
std::vector<X> classical_hermite_values(int n_max, const X& z) {
  std::vector<X> out(static_cast<std::size_t>(n_max) + 1);
  X prev(0);
  X cur(1);
  for (int k = 0; k <= n_max; ++k) {
    out[static_cast<std::size_t>(k)] = cur;
    X next = z * cur - X(k) * prev;
    prev = cur;
    cur = next;
  }
  return out;
}

/// P_n(x|y,rho,1) = sum_m (-1)^m n!/(m!(n-2m)!2^m) (1-rho^2)^m (x - rho y)^{n-2m}.
inline RationalPoly asc_classical_coeffs(const Family<Rational>& f, int n) {
  const Rational one(1);
  const Rational s2 = one - f.rho * f.rho;
  const RationalPoly shift{Rational(-f.rho * f.y), one};
  // powers of (x - rho y)
  std::vector<RationalPoly> pw(static_cast<std::size_t>(n) + 1);
  pw[0] = RationalPoly::constant(one);
  for (int i = 1; i <= n; ++i) pw[static_cast<std::size_t>(i)] = pw[static_cast<std::size_t>(i - 1)] * shift;
  RationalPoly out;
  Rational coef(1);  // n!/(m!(n-2m)!2^m) (-1)^m (1-rho^2)^m, built incrementally
  for (int m = 0; 2 * m <= n; ++m) {
    out += pw[static_cast<std::size_t>(n - 2 * m)] * coef;
    // ratio to the next m: -(n-2m)(n-2m-1) / (2(m+1)) * (1-rho^2)
    Rational step(-(n - 2 * m) * (n - 2 * m - 1), 2 * (m + 1));
    step.canonicalize();
    coef *= step;
    coef *= s2;
  }
  return out;
}

/// Forward recurrence for ASC used even at q == 1 (for degeneration tests only).
template <class T>
Polynomial<T> recurrence_coeffs(const Family<T>& f, int n) {
  Polynomial<T> prev;
  Polynomial<T> cur = Polynomial<T>::constant(T(1));
  for (int k = 0; k < n; ++k) {
    const Step<T> s = recurrence_step(f, k);
    Polynomial<T> next = cur.times_linear(s.a, s.b) - prev * s.c;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

}  // namespace detail

/// Values p_0(x), ..., p_{n_max}(x) by one forward recurrence pass.
template <class T, class X>
std::vector<X> eval_all(const Family<T>& f, int n_max, const X& x) {
  if (n_max < 0) throw InvalidParameter("n must be >= 0");
  f.validate();
  if (f.classical_asc()) {
    if constexpr (is_exact_v<X>) {
      Family<Rational> fe;
      if constexpr (is_exact_v<T>) {
        fe = f;
      } else {
        fe = exact_family(f);
      }
      std::vector<X> out;
      for (int k = 0; k <= n_max; ++k) out.push_back(detail::asc_classical_coeffs(fe, k).evaluate(x));
      return out;
    } else {
      const X rho = scalar_cast<X>(f.rho);
      const X s = std::sqrt(X(1) - rho * rho);
      std::vector<X> he = detail::classical_hermite_values<X>(n_max, (x - rho * scalar_cast<X>(f.y)) / s);
      X scale(1);
      for (auto& v : he) {
        v *= scale;
        scale *= s;
      }
      return he;
    }
  }
  std::vector<X> out(static_cast<std::size_t>(n_max) + 1);
  X prev(0);
  X cur(1);
  for (int k = 0; k <= n_max; ++k) {
    out[static_cast<std::size_t>(k)] = cur;
    if (k == n_max) break;
    const Step<T> s = recurrence_step(f, k);
    X next = (scalar_cast<X>(s.a) * x + scalar_cast<X>(s.b)) * cur - scalar_cast<X>(s.c) * prev;
    prev = cur;
    cur = next;
  }
  return out;
}

/// p_n(x).
template <class T, class X>
X eval(const Family<T>& f, int n, const X& x) {
  return eval_all<T, X>(f, n, x).back();
}

inline double eval(const Family<double>& f, int n, double x) { return eval<double, double>(f, n, x); }

/// Exact coefficient vectors of p_0, ..., p_{n_max}.
inline std::vector<RationalPoly> coeffs_all(const Family<Rational>& f, int n_max) {
  if (n_max < 0) throw InvalidParameter("n must be >= 0");
  f.validate();
  std::vector<RationalPoly> out;
  out.reserve(static_cast<std::size_t>(n_max) + 1);
  if (f.classical_asc()) {
    for (int k = 0; k <= n_max; ++k) out.push_back(detail::asc_classical_coeffs(f, k));
    return out;
  }
  RationalPoly prev;
  RationalPoly cur = RationalPoly::constant(Rational(1));
  for (int k = 0; k <= n_max; ++k) {
    out.push_back(cur);
    if (k == n_max) break;
    const Step<Rational> s = recurrence_step(f, k);
    RationalPoly next = cur.times_linear(s.a, s.b) - prev * s.c;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return out;
}

inline RationalPoly coeffs(const Family<Rational>& f, int n) { return coeffs_all(f, n).back(); }

/// Points covered by the special-value table.
enum class SpecialPoint {
  Zero,
  One,
  Half,
  /// x = 2/sqrt(1-q); the value returned is (1-q)^{n/2} H_n(2/sqrt(1-q)|q), which is rational.
  Edge,
};

/// Closed-form special values of U_n, H_n, k_n, B_n and R_n.
template <class T>
T special_value(const Family<T>& f, int n, SpecialPoint p) {
  if (n < 0) throw InvalidParameter("n must be >= 0");
  const auto unsupported = [&]() -> T {
    throw UnsupportedPair(std::string("no special value for ") + family_name(f.tag) + " at this point");
  };
  const bool even = n % 2 == 0;
  const int k = even ? n / 2 : (n + 1) / 2;  // n = 2k or n = 2k - 1
  switch (f.tag) {
    case FamilyTag::ChebU:
      switch (p) {
        case SpecialPoint::Zero: return even ? sign_pow<T>(k) : T(0);
        case SpecialPoint::One: return T(n + 1);
        case SpecialPoint::Half: {
          const int m = (n + 2) / 3;
          return sign_pow<T>(3LL * m) * T(n + 1 - 3 * m);
        }
        default: return unsupported();
      }
    case FamilyTag::QHermite:
      if (p == SpecialPoint::Zero) return even ? T(sign_pow<T>(k) * q_double_factorial_odd<T>(k, f.q)) : T(0);
      if (p == SpecialPoint::Edge) return rogers_szego_sum<T>(n, f.q);
      return unsupported();
    case FamilyTag::Kesten:
      if (n == 0) return T(1);
      if (p == SpecialPoint::Zero) {
        if (even) return T(sign_pow<T>(k) * (T(1) - f.rho * f.rho));
        return T(sign_pow<T>(k) * f.rho * f.y);
      }
      if (p == SpecialPoint::One) {
        const int j = (n + 2) / 3;
        switch (n - 3 * j) {
          case 0: return T(sign_pow<T>(j) * (T(1) - f.rho * f.rho));
          case -1: return T(sign_pow<T>(j - 1) * (f.rho * f.rho - f.rho * f.y));
          default: return T(sign_pow<T>(j - 1) * (T(1) - f.rho * f.y));
        }
      }
      return unsupported();
    case FamilyTag::BigB:
      if (p != SpecialPoint::Zero) return unsupported();
      return even ? T(ipow(f.q, static_cast<long long>(k) * (k - 1)) * q_double_factorial_odd<T>(k, f.q)) : T(0);
    case FamilyTag::Rogers:
      if (p != SpecialPoint::Zero) return unsupported();
      return even ? T(sign_pow<T>(k) * q_pochhammer<T>(T(f.beta * f.beta), T(f.q * f.q), k) *
                      q_double_factorial_odd<T>(k, f.q))
                  : T(0);
    default:
      return unsupported();
  }
}

/// Bound on max_{x in S(q)} |p_n(x)| for QHermite, W_n/(1-q)^{n/2}, and
/// Rogers, (q)_n V_n/(1-q)^{n/2}. The Rogers form reduces to the QHermite one
/// at beta = 0 and holds for q < 0 as well.
inline double max_bound(FamilyTag tag, int n, double q, double beta = 0.0) {
  if (!(std::abs(q) < 1.0)) throw InvalidParameter("max_bound requires |q| < 1");
  const double scale = std::pow(1.0 - q, -0.5 * n);
  switch (tag) {
    case FamilyTag::QHermite:
      return rogers_szego_sum<double>(n, q) * scale;
    case FamilyTag::Rogers:
      return rogers_bound_sum<double>(n, q, beta) * q_pochhammer<double>(q, q, n) * scale;
    default:
      throw UnsupportedPair(std::string("max_bound is defined for qhermite and rogers, not ") + family_name(tag));
  }
}

/// Bounds sup_{x in S(q)} |p_n(x)| for every family with compact support, for
/// k = 0..n_max. Families on the whole line (ClassicalHermite, BigB) throw.
inline std::vector<double> sup_bounds(const Family<double>& f, int n_max) {
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1);
  const auto at = [&](int k) -> double& { return out[static_cast<std::size_t>(k)]; };
  switch (f.tag) {
    case FamilyTag::QHermite:
    case FamilyTag::Rogers:
      for (int k = 0; k <= n_max; ++k) at(k) = max_bound(f.tag, k, f.q, f.beta);
      return out;
    case FamilyTag::ASC: {
      // P_n = sum_j [n j] rho^{n-j} B_{n-j}(y) H_j(x)
      const std::vector<double> b = eval_all(Family<double>::big_b(f.q), n_max, f.y);
      for (int n = 0; n <= n_max; ++n) {
        double s = 0.0;
        for (int j = 0; j <= n; ++j) {
          s += q_binomial<double>(n, j, f.q) * std::pow(std::abs(f.rho), n - j) *
               std::abs(b[static_cast<std::size_t>(n - j)]) * max_bound(FamilyTag::QHermite, j, f.q);
        }
        at(n) = s;
      }
      return out;
    }
    case FamilyTag::ChebT:
      for (int k = 0; k <= n_max; ++k) at(k) = 1.0;
      return out;
    case FamilyTag::ChebU:
      for (int k = 0; k <= n_max; ++k) at(k) = k + 1.0;
      return out;
    case FamilyTag::ChebTHat:
      for (int k = 0; k <= n_max; ++k) at(k) = std::pow(1.0 - f.q, -0.5 * k);
      return out;
    case FamilyTag::ChebUHat:
      for (int k = 0; k <= n_max; ++k) at(k) = (k + 1.0) * std::pow(1.0 - f.q, -0.5 * k);
      return out;
    case FamilyTag::Kesten:
    case FamilyTag::KestenHat: {
      const double s = f.tag == FamilyTag::Kesten ? 1.0 : std::sqrt(1.0 - f.q);
      const double ry = std::abs(f.rho * f.y * s);
      const double r2 = f.rho * f.rho;
      for (int k = 0; k <= n_max; ++k) {
        const double raw = k == 0 ? 1.0 : (k + 1.0) + ry * k + r2 * (k - 1.0);
        at(k) = raw / std::pow(s, k);
      }
      return out;
    }
    default:
      throw UnsupportedPair(std::string("no sup bound on the whole line for ") + family_name(f.tag));
  }
}

/// Values s^k p_k(x) for k = 0..n_max, from the recurrence rescaled by s.
/// With s = sqrt(1-q) this keeps q-Hermite-type values bounded on S(q).
template <class T>
std::vector<double> eval_all_scaled(const Family<T>& f, int n_max, double x, double s) {
  if (n_max < 0) throw InvalidParameter("n must be >= 0");
  f.validate();
  if (f.classical_asc()) {
    std::vector<double> v = eval_all<T, double>(f, n_max, x);
    double p = 1.0;
    for (double& e : v) {
      e *= p;
      p *= s;
    }
    return v;
  }
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1);
  double prev = 0.0;
  double cur = 1.0;
  for (int k = 0; k <= n_max; ++k) {
    out[static_cast<std::size_t>(k)] = cur;
    if (k == n_max) break;
    const Step<T> st = recurrence_step(f, k);
    const double next = (to_double(st.a) * s * x + to_double(st.b) * s) * cur - to_double(st.c) * s * s * prev;
    prev = cur;
    cur = next;
  }
  return out;
}

/// Squared norm of p_n under the family's orthogonality density:
/// H_n under fN, P_n under fCN, R_n under fR, the hat families under fU, fT
/// and fK, k_n under fK at q = 0, He_n under the standard Gaussian.
template <class T>
T squared_norm(const Family<T>& f, int n) {
  if (n < 0) throw InvalidParameter("n must be >= 0");
  f.validate();
  const T one(1);
  switch (f.tag) {
    case FamilyTag::QHermite:
      return q_factorial<T>(n, f.q);
    case FamilyTag::ASC:
      return T(q_pochhammer<T>(T(f.rho * f.rho), f.q, n) * q_factorial<T>(n, f.q));
    case FamilyTag::Rogers:
      return T((one - f.beta) * q_pochhammer<T>(T(f.beta * f.beta), f.q, n) * q_factorial<T>(n, f.q) /
               (one - f.beta * ipow(f.q, n)));
    case FamilyTag::ChebUHat:
      return ipow(T(one / (one - f.q)), n);
    case FamilyTag::ChebTHat:
      return n == 0 ? one : T(ipow(T(one / (one - f.q)), n) / T(2));
    case FamilyTag::KestenHat:
      return n == 0 ? one : T((one - f.rho * f.rho) * ipow(T(one / (one - f.q)), n));
    case FamilyTag::Kesten:
      return n == 0 ? one : T(one - f.rho * f.rho);
    case FamilyTag::ClassicalHermite: {
      T out(1);
      for (int i = 2; i <= n; ++i) out *= T(i);
      return out;
    }
    default:
      throw UnsupportedPair(std::string("no orthogonality density for ") + family_name(f.tag));
  }
}

}  // namespace qortho
