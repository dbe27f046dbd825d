#pragma once

// Expansions target(x) = base(x) * sum_n c_n a_n(x), where a_n are the
// orthogonal polynomials of the base density, and the q-series identities
// obtained by evaluating them at special points.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "qortho/connect.hpp"
#include "qortho/densities.hpp"
#include "qortho/error.hpp"
#include "qortho/polyfam.hpp"
#include "qortho/qcore.hpp"
#include "qortho/rational.hpp"
#include "qortho/report.hpp"

namespace qortho {

enum class ExpansionId {
  NOverU,           ///< fN = fU sum (-1)^k q^{k(k+1)/2} U_{2k}(x sqrt(1-q)/2)
  UOverN,           ///< fU = fN sum q^k (1-q)^{k+1} / ((q)_k (q)_{k+1}) H_{2k}
  CNOverN,          ///< Poisson-Mehler kernel: fCN = fN sum rho^n/[n]! H_n(x) H_n(y)
  NOverCN,          ///< its reciprocal: fN = fCN sum rho^n/((rho^2)_n [n]!) B_n(y) P_n(x)
  ROverN,           ///< fR(beta) = fN sum beta^k/([k]! (beta q)_k) H_{2k}
  NOverR,           ///< fN = fR(gamma) sum ... R_{2k}(x|gamma)
  CNOverK,          ///< fCN = fK (1 + sum_{n>=2} beta_n k_n(x s|y s, rho))
  CNOverU,          ///< fCN = fU (1 + sum gamma_k U_k(x s/2))
  MehlerClassical,  ///< Gaussian Mehler formula
  PMq0,             ///< the kernel at q = 0 in Chebyshev U form
};

inline constexpr ExpansionId kAllExpansions[] = {
    ExpansionId::NOverU,  ExpansionId::UOverN,  ExpansionId::CNOverN,         ExpansionId::NOverCN,
    ExpansionId::ROverN,  ExpansionId::NOverR,  ExpansionId::CNOverK,         ExpansionId::CNOverU,
    ExpansionId::MehlerClassical, ExpansionId::PMq0,
};

inline const char* expansion_name(ExpansionId id) {
  switch (id) {
    case ExpansionId::NOverU: return "N_over_U";
    case ExpansionId::UOverN: return "U_over_N";
    case ExpansionId::CNOverN: return "CN_over_N";
    case ExpansionId::NOverCN: return "N_over_CN";
    case ExpansionId::ROverN: return "R_over_N";
    case ExpansionId::NOverR: return "N_over_R";
    case ExpansionId::CNOverK: return "CN_over_K";
    case ExpansionId::CNOverU: return "CN_over_U";
    case ExpansionId::MehlerClassical: return "Mehler_classical";
    case ExpansionId::PMq0: return "PM_q0";
  }
  return "?";
}

inline ExpansionId parse_expansion(const std::string& name) {
  for (ExpansionId id : kAllExpansions) {
    if (name == expansion_name(id)) return id;
  }
  throw InvalidParameter("unknown expansion '" + name + "'");
}

/// Parameters of an expansion. `beta` is the Rogers parameter: beta for
/// R_over_N, gamma for N_over_R.
template <class T>
struct ExpansionParams {
  T q = T(0);
  T y = T(0);
  T rho = T(0);
  T beta = T(0);
};

/// Mehler_classical lives at q = 1 and PM_q0 at q = 0 whatever q says.
template <class T>
T effective_q(ExpansionId id, const ExpansionParams<T>& p) {
  if (id == ExpansionId::MehlerClassical) return T(1);
  if (id == ExpansionId::PMq0) return T(0);
  return p.q;
}

namespace detail {

inline bool uses_rho(ExpansionId id) {
  switch (id) {
    case ExpansionId::CNOverN:
    case ExpansionId::NOverCN:
    case ExpansionId::CNOverK:
    case ExpansionId::CNOverU:
    case ExpansionId::MehlerClassical:
    case ExpansionId::PMq0:
      return true;
    default:
      return false;
  }
}

}  // namespace detail

template <class T>
void validate(ExpansionId id, const ExpansionParams<T>& p) {
  const double q = to_double(effective_q(id, p));
  if (id != ExpansionId::MehlerClassical && !(q > -1.0 && q < 1.0)) {
    throw InvalidParameter(std::string(expansion_name(id)) + " needs -1 < q < 1");
  }
  if (detail::uses_rho(id)) {
    if (!(std::abs(to_double(p.rho)) < 1.0)) throw InvalidParameter("|rho| < 1 required");
    if (id != ExpansionId::MehlerClassical && !support(q).contains(to_double(p.y))) {
      throw SupportViolation("y outside S(q)");
    }
  }
  if ((id == ExpansionId::ROverN || id == ExpansionId::NOverR) && !(std::abs(to_double(p.beta)) < 1.0)) {
    throw InvalidParameter("|beta| < 1 required");
  }
}

/// The density being expanded.
inline DensityId expansion_target(ExpansionId id, const ExpansionParams<double>& p) {
  validate(id, p);
  const double q = effective_q(id, p);
  switch (id) {
    case ExpansionId::NOverU:
    case ExpansionId::NOverCN:
    case ExpansionId::NOverR: return DensityId::normal(q);
    case ExpansionId::UOverN: return DensityId::semicircle(q);
    case ExpansionId::ROverN: return DensityId::rogers(p.beta, q);
    default: return DensityId::conditional(p.y, p.rho, q);
  }
}

/// The density multiplying the series.
inline DensityId expansion_base(ExpansionId id, const ExpansionParams<double>& p) {
  validate(id, p);
  const double q = effective_q(id, p);
  switch (id) {
    case ExpansionId::NOverU:
    case ExpansionId::CNOverU: return DensityId::semicircle(q);
    case ExpansionId::NOverCN: return DensityId::conditional(p.y, p.rho, q);
    case ExpansionId::NOverR: return DensityId::rogers(p.beta, q);
    case ExpansionId::CNOverK: return DensityId::kesten(p.y, p.rho, q);
    default: return DensityId::normal(q);
  }
}

/// Orthogonal family of the base density, in the normalization used by
/// basis_coefficients (the rescaled U and Kesten families are monic).
template <class T>
Family<T> expansion_family(ExpansionId id, const ExpansionParams<T>& p) {
  const T q = effective_q(id, p);
  switch (id) {
    case ExpansionId::NOverU:
    case ExpansionId::CNOverU: return Family<T>::cheb_u_hat(q);
    case ExpansionId::NOverCN: return Family<T>::asc(p.y, p.rho, q);
    case ExpansionId::NOverR: return Family<T>::rogers(p.beta, q);
    case ExpansionId::CNOverK: return Family<T>::kesten_hat(p.y, p.rho, q);
    case ExpansionId::MehlerClassical: return Family<T>::classical_hermite();
    default: return Family<T>::qhermite(q);
  }
}

/// Connection pair whose first column gamma_{0,n} yields c_n = gamma_{0,n} / ||a_n||^2.
inline ConnectionPair expansion_pair(ExpansionId id) {
  switch (id) {
    case ExpansionId::NOverU: return ConnectionPair::UFromHermite;
    case ExpansionId::UOverN: return ConnectionPair::HermiteFromU;
    case ExpansionId::CNOverN:
    case ExpansionId::PMq0: return ConnectionPair::HermiteFromAsc;
    case ExpansionId::NOverCN: return ConnectionPair::AscFromHermite;
    case ExpansionId::ROverN: return ConnectionPair::HermiteFromRogers;
    case ExpansionId::NOverR: return ConnectionPair::RogersFromHermite;
    case ExpansionId::CNOverK: return ConnectionPair::KestenFromAsc;
    case ExpansionId::CNOverU: return ConnectionPair::UFromAsc;
    case ExpansionId::MehlerClassical: return ConnectionPair::Mehler;
  }
  throw InvalidParameter("unknown expansion");
}

template <class T>
PairParams<T> expansion_pair_params(ExpansionId id, const ExpansionParams<T>& p) {
  PairParams<T> a;
  a.q = effective_q(id, p);
  a.y = p.y;
  a.rho = p.rho;
  if (id == ExpansionId::ROverN) a.beta = p.beta;
  if (id == ExpansionId::NOverR) a.gamma = p.beta;
  return a;
}

/// c_0..c_{n_max} against expansion_family(id, p). Exact for Rational.
template <class T>
std::vector<T> basis_coefficients(ExpansionId id, const ExpansionParams<T>& p, int n_max) {
  if (n_max < 0) throw InvalidParameter("n must be >= 0");
  validate(id, p);
  const T one(1);
  const T q = effective_q(id, p);
  const T omq = one - q;
  std::vector<T> c(static_cast<std::size_t>(n_max) + 1, T(0));
  const auto at = [&](int n) -> T& { return c[static_cast<std::size_t>(n)]; };
  switch (id) {
    case ExpansionId::NOverU:
      for (int k = 0; 2 * k <= n_max; ++k) at(2 * k) = sign_pow<T>(k) * ipow(q, k * (k + 1) / 2) * ipow(omq, k);
      break;
    case ExpansionId::UOverN:
      for (int k = 0; 2 * k <= n_max; ++k) {
        at(2 * k) = ipow(q, k) * ipow(omq, k + 1) / (q_pochhammer<T>(q, q, k) * q_pochhammer<T>(q, q, k + 1));
      }
      break;
    case ExpansionId::CNOverN:
    case ExpansionId::PMq0: {
      const std::vector<T> h = eval_all(Family<T>::qhermite(q), n_max, p.y);
      for (int n = 0; n <= n_max; ++n) at(n) = ipow(p.rho, n) * h[static_cast<std::size_t>(n)] / q_factorial<T>(n, q);
      break;
    }
    case ExpansionId::NOverCN: {
      const std::vector<T> b = eval_all(Family<T>::big_b(q), n_max, p.y);
      const T r2 = p.rho * p.rho;
      for (int n = 0; n <= n_max; ++n) {
        at(n) = ipow(p.rho, n) * b[static_cast<std::size_t>(n)] / (q_pochhammer<T>(r2, q, n) * q_factorial<T>(n, q));
      }
      break;
    }
    case ExpansionId::ROverN:
      for (int k = 0; 2 * k <= n_max; ++k) {
        at(2 * k) = ipow(p.beta, k) / (q_factorial<T>(k, q) * q_pochhammer<T>(T(p.beta * q), q, k));
      }
      break;
    case ExpansionId::NOverR: {
      const T& g = p.beta;
      for (int k = 0; 2 * k <= n_max; ++k) {
        at(2 * k) = ipow(T(-g), k) * ipow(q, k * (k - 1) / 2) * q_pochhammer<T>(g, q, k) * (one - g * ipow(q, 2 * k)) /
                    ((one - g) * q_factorial<T>(k, q) * q_pochhammer<T>(T(g * g), q, 2 * k));
      }
      break;
    }
    case ExpansionId::CNOverK: {
      const std::vector<T> h = eval_all(Family<T>::qhermite(q), n_max, p.y);
      at(0) = one;
      for (int n = 1; n <= n_max; ++n) {
        T s(0);
        for (int j = 1; 2 * j <= n; ++j) {
          const int m = n - 2 * j;
          s += sign_pow<T>(j) * ipow(omq, n - j) * ipow(q, n + j * (j - 3) / 2) * q_binomial<T>(n - 1 - j, m, q) *
               ipow(p.rho, m) * h[static_cast<std::size_t>(m)];
        }
        at(n) = s;
      }
      break;
    }
    case ExpansionId::CNOverU: {
      const std::vector<T> h = eval_all(Family<T>::qhermite(q), n_max, p.y);
      for (int n = 0; n <= n_max; ++n) {
        T s(0);
        for (int j = 0; 2 * j <= n; ++j) {
          const int m = n - 2 * j;
          s += sign_pow<T>(j) * ipow(omq, n - j) * ipow(q, j * (j + 1) / 2) * q_binomial<T>(n - j, m, q) *
               ipow(p.rho, m) * h[static_cast<std::size_t>(m)];
        }
        at(n) = s;
      }
      break;
    }
    case ExpansionId::MehlerClassical: {
      const std::vector<T> h = eval_all(Family<T>::classical_hermite(), n_max, p.y);
      T fact(1);
      for (int n = 0; n <= n_max; ++n) {
        if (n > 0) fact *= T(n);
        at(n) = ipow(p.rho, n) * h[static_cast<std::size_t>(n)] / fact;
      }
      break;
    }
  }
  return c;
}

namespace detail {

inline double qpow(double q, long long e) { return e == 0 ? 1.0 : std::pow(q, static_cast<double>(e)); }

/// Table of (q;q)_n for n = 0..n_max; Gaussian binomials as ratios of it.
class PochhammerTable {
 public:
  PochhammerTable(double q, int n_max) : p_(static_cast<std::size_t>(n_max) + 1, 1.0) {
    for (int n = 1; n <= n_max; ++n) p_[static_cast<std::size_t>(n)] = p_[static_cast<std::size_t>(n - 1)] * (1.0 - qpow(q, n));
  }
  [[nodiscard]] double operator()(int n) const { return p_[static_cast<std::size_t>(n)]; }
  [[nodiscard]] double binom(int n, int k) const {
    if (k < 0 || k > n) return 0.0;
    return (*this)(n) / ((*this)(k) * (*this)(n - k));
  }

 private:
  std::vector<double> p_;
};

/// gamma_k(y, rho, q): coefficients of U_k(x sqrt(1-q)/2) in fCN/fU.
inline std::vector<double> cn_over_u_coeffs(double y, double rho, double q, int n_max) {
  const double s = std::sqrt(1.0 - q);
  const std::vector<double> h = eval_all_scaled(Family<double>::qhermite(q), n_max, y, s);
  const PochhammerTable P(q, n_max);
  std::vector<double> g(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (int k = 0; k <= n_max; ++k) {
    double sum = 0.0;
    for (int j = 0; 2 * j <= k; ++j) {
      const int m = k - 2 * j;
      sum += (j % 2 == 0 ? 1.0 : -1.0) * qpow(q, j * (j + 1) / 2) * P.binom(k - j, m) * std::pow(rho, m) *
             h[static_cast<std::size_t>(m)];
    }
    g[static_cast<std::size_t>(k)] = sum;
  }
  return g;
}

/// beta_n(y, rho, q): coefficients of k_n(x s|y s, rho) in fCN/fK, beta_0 = 1.
inline std::vector<double> cn_over_k_coeffs(double y, double rho, double q, int n_max) {
  const double s = std::sqrt(1.0 - q);
  const std::vector<double> h = eval_all_scaled(Family<double>::qhermite(q), n_max, y, s);
  const PochhammerTable P(q, n_max);
  std::vector<double> b(static_cast<std::size_t>(n_max) + 1, 0.0);
  b[0] = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    double sum = 0.0;
    for (int j = 1; 2 * j <= n; ++j) {
      const int m = n - 2 * j;
      sum += (j % 2 == 0 ? 1.0 : -1.0) * qpow(q, n + j * (j - 3) / 2) * P.binom(n - 1 - j, m) * std::pow(rho, m) *
             h[static_cast<std::size_t>(m)];
    }
    b[static_cast<std::size_t>(n)] = sum;
  }
  return b;
}

}  // namespace detail

/// Coefficient of the n-th term as usually written: on U_{2k}(x sqrt(1-q)/2)
/// (N_over_U), H_{2k} (U_over_N, R_over_N), H_n(x)H_n(y) (CN_over_N),
/// B_n(y)P_n(x) (N_over_CN), R_{2k}(x|gamma) (N_over_R), k_n(x s|y s, rho)
/// (CN_over_K), U_k(x s/2) (CN_over_U), He_n(x)He_n(y) (Mehler_classical) and
/// U_n(x/2)U_n(y/2) (PM_q0). Odd terms of the even expansions are 0.
inline double expansion_coeff(ExpansionId id, int n, const ExpansionParams<double>& p) {
  if (n < 0) throw InvalidParameter("n must be >= 0");
  validate(id, p);
  const double q = effective_q(id, p);
  const bool odd = n % 2 == 1;
  const int k = n / 2;
  switch (id) {
    case ExpansionId::NOverU:
      return odd ? 0.0 : (k % 2 == 0 ? 1.0 : -1.0) * detail::qpow(q, k * (k + 1) / 2);
    case ExpansionId::UOverN:
      return odd ? 0.0
                 : detail::qpow(q, k) * std::pow(1.0 - q, k + 1) /
                       (q_pochhammer<double>(q, q, k) * q_pochhammer<double>(q, q, k + 1));
    case ExpansionId::CNOverN:
      return std::pow(p.rho, n) / q_factorial<double>(n, q);
    case ExpansionId::NOverCN:
      return std::pow(p.rho, n) / (q_pochhammer<double>(p.rho * p.rho, q, n) * q_factorial<double>(n, q));
    case ExpansionId::ROverN:
      return odd ? 0.0 : std::pow(p.beta, k) / (q_factorial<double>(k, q) * q_pochhammer<double>(p.beta * q, q, k));
    case ExpansionId::NOverR: {
      const double g = p.beta;
      return odd ? 0.0
                 : std::pow(-g, k) * detail::qpow(q, k * (k - 1) / 2) * q_pochhammer<double>(g, q, k) *
                       (1.0 - g * detail::qpow(q, 2 * k)) /
                       ((1.0 - g) * q_factorial<double>(k, q) * q_pochhammer<double>(g * g, q, 2 * k));
    }
    case ExpansionId::CNOverK:
      return detail::cn_over_k_coeffs(p.y, p.rho, q, n).back();
    case ExpansionId::CNOverU:
      return detail::cn_over_u_coeffs(p.y, p.rho, q, n).back();
    case ExpansionId::MehlerClassical: {
      double f = 1.0;
      for (int i = 2; i <= n; ++i) f *= i;
      return std::pow(p.rho, n) / f;
    }
    case ExpansionId::PMq0:
      return std::pow(p.rho, n);
  }
  throw InvalidParameter("unknown expansion");
}

struct ExpansionOptions {
  double tol = 1e-12;  ///< bound on the neglected tail of the series
  int k_max = 500;
  int k = -1;  ///< fixed truncation order; negative means adaptive
};

struct ExpansionValue {
  double value = 0.0;       ///< base(x) * partial sum
  double series = 0.0;      ///< partial sum alone
  double tail_bound = 0.0;  ///< estimate of the neglected series tail
  int terms = 0;            ///< truncation order K
};

/// Floating-point series for one (id, params). Polynomials are evaluated in a
/// rescaled form (s^n p_n with s = sqrt(1-q)) so that terms stay O(1); the
/// coefficients absorb the matching powers of s.
class ExpansionSeries {
 public:
  ExpansionSeries(ExpansionId id, const ExpansionParams<double>& p, int k_max = 500)
      : id_(id), p_(p), q_(effective_q(id, p)), k_max_(k_max) {
    if (k_max < 0) throw InvalidParameter("k_max must be >= 0");
    validate(id, p);
    s_ = id == ExpansionId::MehlerClassical ? 1.0 : std::sqrt(1.0 - q_);
    build();
  }

  [[nodiscard]] ExpansionId id() const { return id_; }
  [[nodiscard]] const ExpansionParams<double>& params() const { return p_; }
  [[nodiscard]] int k_max() const { return k_max_; }
  /// Coefficients against the rescaled basis.
  [[nodiscard]] const std::vector<double>& coefficients() const { return coef_; }

  /// Partial sum through order K (adaptive when opt.k < 0) at x.
  [[nodiscard]] ExpansionValue evaluate(double x, const ExpansionOptions& opt = {}) const {
    if (opt.k > k_max_) throw InvalidParameter("requested order exceeds k_max");
    const std::vector<double> b = basis(x, k_max_);
    std::vector<double> bound = bound_;
    if (!sup_bounded_) {
      for (std::size_t n = 0; n < bound.size(); ++n) bound[n] = std::abs(coef_[n] * b[n]);
    }
    int order = opt.k;
    double tail = 0.0;
    if (order < 0) {
      order = choose_order(bound, opt.tol, tail);
    } else {
      tail = tail_estimate(bound, order);
    }
    double sum = 0.0;
    for (int n = 0; n <= order; ++n) sum += coef_[static_cast<std::size_t>(n)] * b[static_cast<std::size_t>(n)];
    return {sum, sum, tail, order};
  }

  /// Estimated |tail| beyond order K from the term bounds.
  [[nodiscard]] double tail_bound(int order) const { return tail_estimate(bound_, order); }

 private:
  ExpansionId id_;
  ExpansionParams<double> p_;
  double q_;
  double s_ = 1.0;
  int k_max_;
  bool sup_bounded_ = true;
  std::vector<double> coef_;
  std::vector<double> bound_;  ///< |coef_n| * sup of the rescaled basis on S(q)

  [[nodiscard]] std::vector<double> basis(double x, int n_max) const {
    const double q = q_;
    switch (id_) {
      case ExpansionId::NOverU:
      case ExpansionId::CNOverU:
        return eval_all(Family<double>::cheb_u(), n_max, x * s_ / 2.0);
      case ExpansionId::PMq0:
        return eval_all(Family<double>::cheb_u(), n_max, x / 2.0);
      case ExpansionId::NOverCN:
        return eval_all_scaled(Family<double>::asc(p_.y, p_.rho, q), n_max, x, s_);
      case ExpansionId::NOverR:
        return eval_all_scaled(Family<double>::rogers(p_.beta, q), n_max, x, s_);
      case ExpansionId::CNOverK:
        return eval_all(Family<double>::kesten(p_.y * s_, p_.rho), n_max, x * s_);
      case ExpansionId::MehlerClassical:
        return normalized_hermite(n_max, x);
      default:
        return eval_all_scaled(Family<double>::qhermite(q), n_max, x, s_);
    }
  }

  /// He_n(x) / sqrt(n!).
  static std::vector<double> normalized_hermite(int n_max, double x) {
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1);
    double prev = 0.0;
    double cur = 1.0;
    for (int n = 0; n <= n_max; ++n) {
      out[static_cast<std::size_t>(n)] = cur;
      const double next = (x * cur - std::sqrt(static_cast<double>(n)) * prev) / std::sqrt(n + 1.0);
      prev = cur;
      cur = next;
    }
    return out;
  }

  void build() {
    const int K = k_max_;
    const double q = q_;
    const double rho = p_.rho;
    coef_.assign(static_cast<std::size_t>(K) + 1, 0.0);
    bound_.assign(static_cast<std::size_t>(K) + 1, 0.0);
    const auto c = [&](int n) -> double& { return coef_[static_cast<std::size_t>(n)]; };
    const detail::PochhammerTable P(q == 1.0 ? 0.0 : q, 2 * K + 2);
    std::vector<double> sup(static_cast<std::size_t>(K) + 1, 1.0);
    const auto rogers_szego = [&](int n) {
      double w = 0.0;
      for (int i = 0; i <= n; ++i) w += P.binom(n, i);
      return w;
    };
    switch (id_) {
      case ExpansionId::NOverU:
        for (int k = 0; 2 * k <= K; ++k) c(2 * k) = (k % 2 == 0 ? 1.0 : -1.0) * detail::qpow(q, k * (k + 1) / 2);
        for (int n = 0; n <= K; ++n) sup[static_cast<std::size_t>(n)] = n + 1.0;
        break;
      case ExpansionId::UOverN:
        for (int k = 0; 2 * k <= K; ++k) c(2 * k) = detail::qpow(q, k) * (1.0 - q) / (P(k) * P(k + 1));
        for (int n = 0; n <= K; ++n) sup[static_cast<std::size_t>(n)] = rogers_szego(n);
        break;
      case ExpansionId::CNOverN: {
        const std::vector<double> h = eval_all_scaled(Family<double>::qhermite(q), K, p_.y, s_);
        for (int n = 0; n <= K; ++n) {
          c(n) = std::pow(rho, n) * h[static_cast<std::size_t>(n)] / P(n);
          sup[static_cast<std::size_t>(n)] = rogers_szego(n);
        }
        break;
      }
      case ExpansionId::NOverCN: {
        const std::vector<double> b = eval_all_scaled(Family<double>::big_b(q), K, p_.y, s_);
        const double r2 = rho * rho;
        double r2poch = 1.0;
        std::vector<double> w(static_cast<std::size_t>(K) + 1);
        for (int n = 0; n <= K; ++n) w[static_cast<std::size_t>(n)] = rogers_szego(n);
        for (int n = 0; n <= K; ++n) {
          if (n > 0) r2poch *= 1.0 - r2 * detail::qpow(q, n - 1);
          c(n) = std::pow(rho, n) * b[static_cast<std::size_t>(n)] / (r2poch * P(n));
          double s = 0.0;
          for (int j = 0; j <= n; ++j) {
            s += P.binom(n, j) * std::pow(std::abs(rho), n - j) * std::abs(b[static_cast<std::size_t>(n - j)]) *
                 w[static_cast<std::size_t>(j)];
          }
          sup[static_cast<std::size_t>(n)] = s;
        }
        break;
      }
      case ExpansionId::ROverN: {
        double bq = 1.0;
        for (int k = 0; 2 * k <= K; ++k) {
          if (k > 0) bq *= 1.0 - p_.beta * detail::qpow(q, k);
          c(2 * k) = std::pow(p_.beta, k) / (P(k) * bq);
        }
        for (int n = 0; n <= K; ++n) sup[static_cast<std::size_t>(n)] = rogers_szego(n);
        break;
      }
      case ExpansionId::NOverR: {
        const double g = p_.beta;
        for (int k = 0; 2 * k <= K; ++k) {
          c(2 * k) = std::pow(-g, k) * detail::qpow(q, k * (k - 1) / 2) * q_pochhammer<double>(g, q, k) *
                     (1.0 - g * detail::qpow(q, 2 * k)) /
                     ((1.0 - g) * P(k) * q_pochhammer<double>(g * g, q, 2 * k));
        }
        for (int n = 0; n <= K; ++n) sup[static_cast<std::size_t>(n)] = rogers_bound_sum<double>(n, q, g) * P(n);
        break;
      }
      case ExpansionId::CNOverK: {
        coef_ = detail::cn_over_k_coeffs(p_.y, rho, q, K);
        const double ry = std::abs(rho * p_.y * s_);
        for (int n = 1; n <= K; ++n) sup[static_cast<std::size_t>(n)] = (n + 1.0) + ry * n + rho * rho * (n - 1.0);
        break;
      }
      case ExpansionId::CNOverU:
        coef_ = detail::cn_over_u_coeffs(p_.y, rho, q, K);
        for (int n = 0; n <= K; ++n) sup[static_cast<std::size_t>(n)] = n + 1.0;
        break;
      case ExpansionId::PMq0: {
        const std::vector<double> u = eval_all(Family<double>::cheb_u(), K, p_.y / 2.0);
        for (int n = 0; n <= K; ++n) {
          c(n) = std::pow(rho, n) * u[static_cast<std::size_t>(n)];
          sup[static_cast<std::size_t>(n)] = n + 1.0;
        }
        break;
      }
      case ExpansionId::MehlerClassical: {
        // no uniform bound on the line; evaluate() bounds terms pointwise
        sup_bounded_ = false;
        const std::vector<double> h = normalized_hermite(K, p_.y);
        for (int n = 0; n <= K; ++n) c(n) = std::pow(rho, n) * h[static_cast<std::size_t>(n)];
        break;
      }
    }
    for (int n = 0; n <= K; ++n) {
      bound_[static_cast<std::size_t>(n)] = std::abs(coef_[static_cast<std::size_t>(n)]) * sup[static_cast<std::size_t>(n)];
    }
  }

  /// sum_{n > K} bound_n, with a geometric extrapolation past k_max.
  [[nodiscard]] double tail_estimate(const std::vector<double>& bound, int order) const {
    const int K = k_max_;
    double tail = 0.0;
    for (int n = order + 1; n <= K; ++n) tail += bound[static_cast<std::size_t>(n)];
    return tail + extrapolation(bound);
  }

  /// Geometric continuation of the bounds past k_max, from the largest bound
  /// in each of the last two windows of ten (robust to oscillating terms).
  [[nodiscard]] double extrapolation(const std::vector<double>& bound) const {
    const int K = k_max_;
    constexpr int w = 10;
    if (K < 2 * w) return std::numeric_limits<double>::infinity();
    double recent = 0.0, earlier = 0.0;
    for (int i = 0; i < w; ++i) {
      recent = std::max(recent, bound[static_cast<std::size_t>(K - i)]);
      earlier = std::max(earlier, bound[static_cast<std::size_t>(K - w - i)]);
    }
    if (recent == 0.0) return 0.0;
    if (!std::isfinite(recent) || !(earlier > 0.0)) return std::numeric_limits<double>::infinity();
    const double r = std::pow(recent / earlier, 1.0 / w);
    if (!(r < 1.0)) return std::numeric_limits<double>::infinity();
    return recent * r / (1.0 - r);
  }

  [[nodiscard]] int choose_order(const std::vector<double>& bound, double tol, double& tail) const {
    const int K = k_max_;
    double suffix = extrapolation(bound);
    // suffix holds the estimate for order n while scanning downwards
    int best = -1;
    double best_tail = suffix;
    for (int n = K; n >= 0; --n) {
      if (suffix <= tol) {
        best = n;
        best_tail = suffix;
      } else {
        break;
      }
      suffix += bound[static_cast<std::size_t>(n)];
    }
    if (best < 0) {
      const auto sci = [](double v) {
        std::ostringstream os;
        os << v;
        return os.str();
      };
      throw TruncationUnreliable(std::string(expansion_name(id_)) + ": tail estimate " +
                                 sci(extrapolation(bound)) + " past k_max = " + std::to_string(K) + " exceeds tol " +
                                 sci(tol));
    }
    tail = best_tail;
    return best;
  }
};

/// An expansion together with its truncation policy.
struct ExpansionSpec {
  ExpansionId id = ExpansionId::CNOverN;
  ExpansionParams<double> params;
  ExpansionOptions options;
};

/// base(x) times the partial sum; y, where it matters, is part of the params.
inline ExpansionValue expansion_eval(const ExpansionSeries& series, double x, const ExpansionOptions& opt = {}) {
  ExpansionValue v = series.evaluate(x, opt);
  const double base = density_eval(expansion_base(series.id(), series.params()), x);
  v.value = base * v.series;
  v.tail_bound *= base;
  return v;
}

inline ExpansionValue expansion_eval(const ExpansionSpec& spec, double x) {
  const int k_max = spec.options.k >= 0 ? std::max(spec.options.k, 20) : spec.options.k_max;
  return expansion_eval(ExpansionSeries(spec.id, spec.params, k_max), x, spec.options);
}

/// The Gaussian reciprocal of the Mehler kernel,
/// sum rho^n B_n(y|1) He_n((x - rho y)/sqrt(1-rho^2)) / (n! (1-rho^2)^{n/2}),
/// which converges only for rho^2 < 1/2. Returns the series and its product
/// with the N(rho y, 1 - rho^2) density, which approximates the standard normal.
inline ExpansionValue mehler_reciprocal(double x, double y, double rho, const ExpansionOptions& opt = {}) {
  if (!(rho * rho < 0.5)) throw InvalidParameter("the reciprocal Mehler series needs rho^2 < 1/2");
  const double sd = std::sqrt(1.0 - rho * rho);
  const double z = (x - rho * y) / sd;
  const int K = opt.k >= 0 ? opt.k : opt.k_max;
  // B_n(y|1)/sqrt(n!) and He_n(z)/sqrt(n!)
  std::vector<double> b(static_cast<std::size_t>(K) + 1);
  std::vector<double> h(static_cast<std::size_t>(K) + 1);
  double bp = 0.0, bc = 1.0, hp = 0.0, hc = 1.0;
  for (int n = 0; n <= K; ++n) {
    b[static_cast<std::size_t>(n)] = bc;
    h[static_cast<std::size_t>(n)] = hc;
    const double r = std::sqrt(n + 1.0);
    const double sn = std::sqrt(static_cast<double>(n));
    const double bn = (-y * bc + sn * bp) / r;
    const double hn = (z * hc - sn * hp) / r;
    bp = bc;
    bc = bn;
    hp = hc;
    hc = hn;
  }
  double sum = 0.0;
  double scale = 1.0;
  const double ratio = rho / sd;
  int order = K;
  double last = 0.0;
  for (int n = 0; n <= K; ++n) {
    const double t = scale * b[static_cast<std::size_t>(n)] * h[static_cast<std::size_t>(n)];
    sum += t;
    scale *= ratio;
    last = std::abs(t);
    if (opt.k < 0 && n >= 8) {
      const double prev = std::abs(scale / ratio / ratio * b[static_cast<std::size_t>(n - 1)] * h[static_cast<std::size_t>(n - 1)]);
      if (last + prev <= opt.tol) {
        order = n;
        break;
      }
    }
    if (n == K && opt.k < 0) {
      throw TruncationUnreliable("reciprocal Mehler series did not settle within k_max terms");
    }
  }
  const double base = detail::gaussian(x, rho * y, 1.0 - rho * rho);
  return {base * sum, sum, last, order};
}

// ---------------------------------------------------------------------------
// q-series identities

struct IdentityConfig {
  std::vector<double> q_grid{0.2, 0.5, 0.8};
  std::vector<double> rho_grid{0.3, 0.6};
  double tol = 1e-10;
  /// (q, rho) settings and grid size for the reciprocity check
  std::vector<std::array<double, 2>> reciprocal_settings{{0.3, 0.4}};
  int reciprocal_grid = 5;
  double reciprocal_tol = 1e-6;
  double product_eps = 1e-16;
};

namespace detail {

struct SeriesSum {
  double value = 0.0;
  double last = 0.0;
  bool converged = false;
};

/// sum_{n >= 0} term(n) until three consecutive terms fall below
/// 1e-18 * max(1, |sum|).
template <class Term>
SeriesSum sum_series(Term&& term, int cap = 20000) {
  SeriesSum s;
  int quiet = 0;
  for (int n = 0; n < cap; ++n) {
    const double t = term(n);
    s.value += t;
    s.last = std::abs(t);
    if (s.last <= 1e-18 * std::max(1.0, std::abs(s.value))) {
      if (++quiet >= 3) {
        s.converged = true;
        return s;
      }
    } else {
      quiet = 0;
    }
  }
  return s;
}

inline double prod_value(const LogProduct& p) { return p.value(); }

inline nlohmann::ordered_json qparams(double q) {
  nlohmann::ordered_json j;
  j["q"] = q;
  return j;
}

}  // namespace detail

/// Identities (i1)-(i8): each side is computed independently, products by
/// truncated log-space products and series by direct summation. Residuals are
/// relative to max(1, |rhs|); the reciprocity check (i8) is absolute.
inline std::vector<VerificationReport> identity_suite(const IdentityConfig& cfg = {}) {
  std::vector<VerificationReport> out;
  const double eps = cfg.product_eps;
  const auto add = [&](const std::string& id, nlohmann::ordered_json params, double lhs, double rhs,
                       const detail::SeriesSum& series, double bound) {
    params["lhs"] = lhs;
    params["rhs"] = rhs;
    if (!series.converged) {
      out.push_back(VerificationReport::failed("identity/" + id, params, cfg.tol, "series did not converge"));
      return;
    }
    out.push_back(VerificationReport::numeric("identity/" + id, params, relative_residual(lhs, rhs), cfg.tol,
                                              bound + series.last, true));
  };
  const auto poch = [&](double a, double q) { return q_pochhammer_inf(a, q, eps).value; };

  for (double q : cfg.q_grid) {
    const double s = std::sqrt(1.0 - q);
    const double L = 2.0 / s;
    const std::vector<double> xs{0.0, 0.4 * L, 0.8 * L};
    const double qq = poch(q, q);
    // (i1) and (i4): the fN/fU product and its reciprocal
    for (double x : xs) {
      auto p = detail::qparams(q);
      p["x"] = x;
      const LogProduct nf = detail::normal_factors(x, q, eps, 1);
      const double lhs1 = qq * nf.value();
      const double z = x * s / 2.0;
      // U_{2k}(z) by the recurrence, two steps at a time
      double u_prev = 0.0, u_cur = 1.0;
      int u_index = 0;
      const auto u_even = [&](int k) {
        while (u_index < 2 * k) {
          const double next = 2.0 * z * u_cur - u_prev;
          u_prev = u_cur;
          u_cur = next;
          ++u_index;
        }
        return u_cur;
      };
      const detail::SeriesSum r1 = detail::sum_series(
          [&](int k) { return (k % 2 == 0 ? 1.0 : -1.0) * detail::qpow(q, k * (k + 1) / 2) * u_even(k); });
      add("i1", p, lhs1, r1.value, r1, nf.value_error());

      // (i4): prod^{-1} = sum q^k (q^{k+1})_inf (1-q)^k/(q^2)_k H_{2k}(x)
      const std::vector<double> h = eval_all_scaled(Family<double>::qhermite(q), 2 * 600, x, s);
      double qk_poch = 1.0;   // (q)_k
      double q2_poch = 1.0;   // (q^2;q)_k
      const detail::SeriesSum r4 = detail::sum_series(
          [&](int k) {
            if (2 * k >= static_cast<int>(h.size())) return std::numeric_limits<double>::quiet_NaN();
            if (k > 0) {
              qk_poch *= 1.0 - detail::qpow(q, k);
              q2_poch *= 1.0 - detail::qpow(q, k + 1);
            }
            // (1-q)^k H_{2k} = h_{2k} (rescaled), (q^{k+1})_inf = (q)_inf/(q)_k
            return detail::qpow(q, k) * qq / qk_poch / q2_poch * h[static_cast<std::size_t>(2 * k)];
          },
          4000);
      add("i4", p, 1.0 / nf.value(), r4.value, r4, nf.value_error());
    }
    {
      // (i4) at x = 0 and at the edge
      double qk = 1.0, q2 = 1.0, dfact = 1.0;
      const double mq = poch(-q, q);
      const detail::SeriesSum r0 = detail::sum_series([&](int k) {
        if (k > 0) {
          qk *= 1.0 - detail::qpow(q, k);
          q2 *= 1.0 - detail::qpow(q, k + 1);
          dfact *= q_bracket<double>(2 * k - 1, q);
        }
        return (k % 2 == 0 ? 1.0 : -1.0) * detail::qpow(q, k) * std::pow(1.0 - q, k) * dfact / (qk * q2);
      });
      // (-q)_inf here starts at k = 1: (-q; q)_inf
      add("i4-zero", detail::qparams(q), 1.0 / (qq * mq * mq), r0.value, r0, 0.0);
      double qk2 = 1.0, q22 = 1.0;
      const detail::SeriesSum re = detail::sum_series([&](int k) {
        if (k > 0) {
          qk2 *= 1.0 - detail::qpow(q, k);
          q22 *= 1.0 - detail::qpow(q, k + 1);
        }
        return detail::qpow(q, k) * rogers_szego_sum<double>(2 * k, q) / (qk2 * q22);
      }, 400);
      add("i4-edge", detail::qparams(q), 1.0 / (qq * qq * qq), re.value, re, 0.0);

      // (i2) and (i3)
      const detail::SeriesSum r2 = detail::sum_series([&](int k) { return detail::qpow(q, k * (k + 1) / 2); });
      const double left = qq * mq * mq;
      const double middle = mq * poch(q * q, q * q);
      auto p2 = detail::qparams(q);
      p2["middle"] = middle;
      add("i2", p2, left, r2.value, r2, 0.0);
      add("i2-middle", detail::qparams(q), middle, r2.value, r2, 0.0);
      const detail::SeriesSum r3 = detail::sum_series(
          [&](int k) { return (k % 2 == 0 ? 1.0 : -1.0) * (2.0 * k + 1.0) * detail::qpow(q, k * (k + 1) / 2); });
      add("i3", detail::qparams(q), qq * qq * qq, r3.value, r3, 0.0);
    }

    for (double rho : cfg.rho_grid) {
      const double r2poch = poch(rho * rho, q);
      const double rpoch = poch(rho, q);
      // (i5): (rho^2)_inf / ((rho)_inf^2 prod_k ((1+rho q^k)^2 - (1-q) rho x^2 q^k)) = sum rho^n/[n]! H_n(x)^2
      for (double x : xs) {
        auto p = detail::qparams(q);
        p["rho"] = rho;
        p["x"] = x;
        const LogProduct f = log_product(
            [&](int k) {
              const double rq = rho * detail::qpow(q, k);
              return (1.0 + rq) * (1.0 + rq) - (1.0 - q) * x * x * rq;
            },
            7.0 * std::abs(rho), q, eps);
        const double lhs = r2poch / (rpoch * rpoch * f.value());
        const std::vector<double> h = eval_all_scaled(Family<double>::qhermite(q), 3000, x, s);
        double qn = 1.0;
        const detail::SeriesSum r = detail::sum_series(
            [&](int n) {
              if (n >= static_cast<int>(h.size())) return std::numeric_limits<double>::quiet_NaN();
              if (n > 0) qn *= 1.0 - detail::qpow(q, n);
              const double hn = h[static_cast<std::size_t>(n)];
              return std::pow(rho, n) * hn * hn / qn;
            },
            3000);
        add("i5", p, lhs, r.value, r, f.value_error());

        // (i6) on x^2 (1-q) <= 2: (1-rho) sum rho^n/[n]! H_n^2 = sum rho^n/([n]! (rho q)_n) H_{2n}
        if (x * x * (1.0 - q) <= 2.0) {
          const std::vector<double> h2 = eval_all_scaled(Family<double>::qhermite(q), 6000, x, s);
          double qm = 1.0, rq = 1.0;
          const detail::SeriesSum r6 = detail::sum_series(
              [&](int n) {
                if (2 * n >= static_cast<int>(h2.size())) return std::numeric_limits<double>::quiet_NaN();
                if (n > 0) {
                  qm *= 1.0 - detail::qpow(q, n);
                  rq *= 1.0 - rho * detail::qpow(q, n);
                }
                // [n]! = (q)_n/(1-q)^n and H_{2n} = h_{2n}/(1-q)^n
                return std::pow(rho, n) * h2[static_cast<std::size_t>(2 * n)] / (qm * rq);
              },
              3000);
          auto p6 = p;
          p6["product_form"] = (1.0 - rho) * lhs;
          add("i6", p6, (1.0 - rho) * r.value, r6.value, r6, f.value_error());
        }
      }
      {
        // (i5) at the edge: (rho^2)_inf/(rho)_inf^4 = sum rho^n W_n^2/(q)_n
        double qn = 1.0;
        const detail::SeriesSum re = detail::sum_series(
            [&](int n) {
              if (n > 0) qn *= 1.0 - detail::qpow(q, n);
              const double w = rogers_szego_sum<double>(n, q);
              return std::pow(rho, n) * w * w / qn;
            },
            2000);
        auto p = detail::qparams(q);
        p["rho"] = rho;
        add("i5-edge", p, r2poch / std::pow(rpoch, 4), re.value, re, 0.0);
        // (i5) at zero: prod (1 - rho^2 q^{2k+1})/(1 - rho^2 q^{2k}) = 1 + sum rho^{2k} prod_j (1-q^{2j-1})/(1-q^{2j})
        const LogProduct num = log_product([&](int k) { return 1.0 - rho * rho * detail::qpow(q, 2 * k + 1); },
                                           rho * rho * std::abs(q), q * q, eps);
        const LogProduct den = log_product([&](int k) { return 1.0 - rho * rho * detail::qpow(q, 2 * k); }, rho * rho,
                                           q * q, eps);
        double ratio = 1.0;
        const detail::SeriesSum rz = detail::sum_series([&](int k) {
          if (k > 0) ratio *= (1.0 - detail::qpow(q, 2 * k - 1)) / (1.0 - detail::qpow(q, 2 * k));
          return std::pow(rho, 2 * k) * ratio;
        });
        add("i5-zero", p, num.value() / den.value(), rz.value, rz, num.value_error() + den.value_error());
      }
      // (i7) at y in S(q)
      for (double y : {0.0, 0.3 * L, -0.6 * L}) {
        auto p = detail::qparams(q);
        p["rho"] = rho;
        p["y"] = y;
        const double q3 = poch(q * q * q, q * q * q);
        const LogProduct den = log_product(
            [&](int k) {
              const double a = rho * rho * detail::qpow(q, 2 * k);
              return 1.0 - a + a * a - s * rho * y * detail::qpow(q, k) * (1.0 + a) + (1.0 - q) * a * y * y;
            },
            10.0, q, eps);
        const double product_side = r2poch * q3 / den.value();
        // eta series
        const int K = 3000;
        const std::vector<double> h = eval_all_scaled(Family<double>::qhermite(q), K, y, s);
        double eta_prev = 0.0, eta = 1.0, qn = 1.0;
        const detail::SeriesSum re = detail::sum_series(
            [&](int k) {
              if (k >= K) return std::numeric_limits<double>::quiet_NaN();
              if (k > 0) qn *= 1.0 - detail::qpow(q, k);
              const double t = std::pow(rho, k) * h[static_cast<std::size_t>(k)] * eta / qn;
              const double next = eta - (1.0 - detail::qpow(q, k)) * eta_prev;
              eta_prev = eta;
              eta = next;
              return t;
            },
            K);
        const double eta_side = q3 * re.value;
        // gamma side: sum_m (-1)^m (gamma_{3m} + gamma_{3m+1}), gamma_0 = 1
        const int G = 600;
        const std::vector<double> g = detail::cn_over_u_coeffs(y, rho, q, G);
        const detail::SeriesSum rg = detail::sum_series(
            [&](int mm) {
              if (3 * mm + 1 > G) return std::numeric_limits<double>::quiet_NaN();
              return (mm % 2 == 0 ? 1.0 : -1.0) *
                     (g[static_cast<std::size_t>(3 * mm)] + g[static_cast<std::size_t>(3 * mm + 1)]);
            },
            G / 3);
        auto pe = p;
        pe["gamma_side"] = rg.value;
        add("i7", pe, eta_side, product_side, re, den.value_error());
        add("i7-gamma", p, rg.value, product_side, rg, den.value_error());
      }
    }
  }

  // (i8): Poisson-Mehler partial sum times its reciprocal partial sum
  for (const auto& setting : cfg.reciprocal_settings) {
    const double q = setting[0];
    const double rho = setting[1];
    const double L = 2.0 / std::sqrt(1.0 - q);
    const int n = cfg.reciprocal_grid;
    double worst = 0.0;
    double bound = 0.0;
    std::string error;
    ExpansionOptions opt;
    opt.tol = 1e-12;
    for (int j = 0; j < n; ++j) {
      const double y = L * (-1.0 + 2.0 * (j + 1.0) / (n + 1.0));
      ExpansionParams<double> p;
      p.q = q;
      p.y = y;
      p.rho = rho;
      try {
        const ExpansionSeries pm(ExpansionId::CNOverN, p);
        const ExpansionSeries rec(ExpansionId::NOverCN, p);
        for (int i = 0; i < n; ++i) {
          const double x = L * (-1.0 + 2.0 * (i + 1.0) / (n + 1.0));
          const ExpansionValue a = pm.evaluate(x, opt);
          const ExpansionValue b = rec.evaluate(x, opt);
          worst = std::max(worst, std::abs(a.series * b.series - 1.0));
          bound = std::max(bound, a.tail_bound + b.tail_bound);
        }
      } catch (const Error& e) {
        error = e.what();
      }
    }
    nlohmann::ordered_json p;
    p["q"] = q;
    p["rho"] = rho;
    p["grid"] = n;
    if (!error.empty()) {
      out.push_back(VerificationReport::failed("identity/i8", p, cfg.reciprocal_tol, error));
    } else {
      out.push_back(VerificationReport::numeric("identity/i8", p, worst, cfg.reciprocal_tol, bound));
    }
  }
  return out;
}

}  // namespace qortho
