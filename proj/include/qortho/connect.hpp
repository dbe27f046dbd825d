#pragma once

// Connection coefficients: a_n = sum_k gamma_{k,n} b_k for pairs of families.
// Closed forms for the known pairs, an exact back-substitution oracle, the
// ratio-driven construction phi_n = sum f_{n-i} a_i and band detection.

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "qortho/error.hpp"
#include "qortho/polyfam.hpp"
#include "qortho/polynomial.hpp"
#include "qortho/qcore.hpp"
#include "qortho/rational.hpp"

namespace qortho {

/// Pairs with a closed form, named "<source>-from-<target>".
enum class ConnectionPair {
  AscFromHermite,    ///< P_n = sum [n j] rho^{n-j} B_{n-j}(y) H_j
  HermiteFromAsc,    ///< H_n = sum [n j] rho^{n-j} H_{n-j}(y) P_j
  UFromHermite,      ///< U-hat_n in the q-Hermite basis
  HermiteFromU,      ///< H_n in the U-hat basis
  RogersFromRogers,  ///< R_n(.|gamma) in the R(.|beta) basis
  RogersFromHermite, ///< R_n(.|gamma) in the q-Hermite basis
  HermiteFromRogers, ///< H_n in the R(.|beta) basis
  UFromAsc,          ///< U-hat_n in the P basis (D_{k,n})
  KestenFromAsc,     ///< k-hat_n in the P basis (C_{k,n})
  TFromU,            ///< T_n = (U_n - U_{n-2})/2
  UFromT,            ///< U_n = 2 sum T_{n-2i} - (1 + (-1)^n)/2
  Mehler,            ///< He_n in the P(.|y,rho,1) basis
};

inline constexpr ConnectionPair kAllPairs[] = {
    ConnectionPair::AscFromHermite,    ConnectionPair::HermiteFromAsc,    ConnectionPair::UFromHermite,
    ConnectionPair::HermiteFromU,      ConnectionPair::RogersFromRogers,  ConnectionPair::RogersFromHermite,
    ConnectionPair::HermiteFromRogers, ConnectionPair::UFromAsc,          ConnectionPair::KestenFromAsc,
    ConnectionPair::TFromU,            ConnectionPair::UFromT,            ConnectionPair::Mehler,
};

inline const char* pair_name(ConnectionPair p) {
  switch (p) {
    case ConnectionPair::AscFromHermite: return "asc-from-hermite";
    case ConnectionPair::HermiteFromAsc: return "hermite-from-asc";
    case ConnectionPair::UFromHermite: return "u-from-hermite";
    case ConnectionPair::HermiteFromU: return "hermite-from-u";
    case ConnectionPair::RogersFromRogers: return "rogers-from-rogers";
    case ConnectionPair::RogersFromHermite: return "rogers-from-hermite";
    case ConnectionPair::HermiteFromRogers: return "hermite-from-rogers";
    case ConnectionPair::UFromAsc: return "u-from-asc";
    case ConnectionPair::KestenFromAsc: return "kesten-from-asc";
    case ConnectionPair::TFromU: return "t-from-u";
    case ConnectionPair::UFromT: return "u-from-t";
    case ConnectionPair::Mehler: return "mehler";
  }
  return "?";
}

inline ConnectionPair parse_pair(const std::string& name) {
  for (ConnectionPair p : kAllPairs) {
    if (name == pair_name(p)) return p;
  }
  throw InvalidPair("unknown connection pair '" + name + "'");
}

/// Parameters of a pair. gamma parametrizes a Rogers source, beta a Rogers target.
template <class T>
struct PairParams {
  T q = T(0);
  T y = T(0);
  T rho = T(0);
  T beta = T(0);
  T gamma = T(0);
};

template <class T>
Family<T> source_family(ConnectionPair p, const PairParams<T>& a) {
  switch (p) {
    case ConnectionPair::AscFromHermite: return Family<T>::asc(a.y, a.rho, a.q);
    case ConnectionPair::HermiteFromAsc:
    case ConnectionPair::HermiteFromU:
    case ConnectionPair::HermiteFromRogers: return Family<T>::qhermite(a.q);
    case ConnectionPair::UFromHermite:
    case ConnectionPair::UFromAsc: return Family<T>::cheb_u_hat(a.q);
    case ConnectionPair::RogersFromRogers:
    case ConnectionPair::RogersFromHermite: return Family<T>::rogers(a.gamma, a.q);
    case ConnectionPair::KestenFromAsc: return Family<T>::kesten_hat(a.y, a.rho, a.q);
    case ConnectionPair::TFromU: return Family<T>::cheb_t();
    case ConnectionPair::UFromT: return Family<T>::cheb_u();
    case ConnectionPair::Mehler: return Family<T>::classical_hermite();
  }
  throw InvalidPair("unknown pair");
}

template <class T>
Family<T> target_family(ConnectionPair p, const PairParams<T>& a) {
  switch (p) {
    case ConnectionPair::AscFromHermite:
    case ConnectionPair::UFromHermite:
    case ConnectionPair::RogersFromHermite: return Family<T>::qhermite(a.q);
    case ConnectionPair::HermiteFromAsc:
    case ConnectionPair::UFromAsc:
    case ConnectionPair::KestenFromAsc: return Family<T>::asc(a.y, a.rho, a.q);
    case ConnectionPair::HermiteFromU: return Family<T>::cheb_u_hat(a.q);
    case ConnectionPair::RogersFromRogers:
    case ConnectionPair::HermiteFromRogers: return Family<T>::rogers(a.beta, a.q);
    case ConnectionPair::TFromU: return Family<T>::cheb_u();
    case ConnectionPair::UFromT: return Family<T>::cheb_t();
    case ConnectionPair::Mehler: return Family<T>::asc(a.y, a.rho, T(1));
  }
  throw InvalidPair("unknown pair");
}

/// Lower-triangular table gamma_{k,n}, 0 <= k <= n <= n_max.
template <class T>
struct ConnectionMatrix {
  Family<T> source;
  Family<T> target;
  int n_max = 0;
  std::vector<std::vector<T>> rows;  ///< rows[n][k]

  [[nodiscard]] T entry(int n, int k) const {
    if (k < 0 || k > n || n > n_max) return T(0);
    return rows[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
  }
};

namespace detail {

template <class T>
T binom_entry(int n, int k, const T& q) {
  return q_binomial<T>(n, k, q);
}

/// Rogers connection coefficient of R_{n-2k}(.|beta) in R_n(.|gamma).
template <class T>
T rogers_coeff(int n, int k, const T& beta, const T& gamma, const T& q) {
  // beta^k (gamma/beta)_k = prod_{i<k} (beta - gamma q^i) stays defined at beta = 0
  T lead(1);
  for (int i = 0; i < k; ++i) lead *= beta - gamma * ipow(q, i);
  T num = lead * q_factorial<T>(n, q) * q_pochhammer<T>(gamma, q, n - k) * (T(1) - beta * ipow(q, n - 2 * k));
  T den = q_factorial<T>(k, q) * q_factorial<T>(n - 2 * k, q) * q_pochhammer<T>(T(beta * q), q, n - k) * (T(1) - beta);
  return num / den;
}

}  // namespace detail

/// Closed-form row gamma_{0..n, n} of the given pair, in the normalization of
/// the families returned by source_family / target_family. Exact for Rational.
template <class T>
std::vector<T> connect_closed_form(ConnectionPair p, const PairParams<T>& a, int n) {
  if (n < 0) throw InvalidParameter("n must be >= 0");
  source_family(p, a).validate();
  target_family(p, a).validate();
  std::vector<T> row(static_cast<std::size_t>(n) + 1, T(0));
  const auto at = [&](int k) -> T& { return row[static_cast<std::size_t>(k)]; };
  const T& q = a.q;
  const T one(1);
  const bool rogers = p == ConnectionPair::RogersFromRogers || p == ConnectionPair::RogersFromHermite ||
                      p == ConnectionPair::HermiteFromRogers;
  if (rogers && q == T(-1)) throw InvalidParameter("Rogers connection coefficients need q != -1");
  switch (p) {
    case ConnectionPair::AscFromHermite: {
      const std::vector<T> b = eval_all(Family<T>::big_b(q), n, a.y);
      for (int j = 0; j <= n; ++j) at(j) = q_binomial<T>(n, j, q) * ipow(a.rho, n - j) * b[static_cast<std::size_t>(n - j)];
      return row;
    }
    case ConnectionPair::HermiteFromAsc:
    case ConnectionPair::Mehler: {
      const T qq = p == ConnectionPair::Mehler ? T(1) : q;
      const std::vector<T> h = eval_all(Family<T>::qhermite(qq), n, a.y);
      for (int j = 0; j <= n; ++j) at(j) = q_binomial<T>(n, j, qq) * ipow(a.rho, n - j) * h[static_cast<std::size_t>(n - j)];
      return row;
    }
    case ConnectionPair::UFromHermite: {
      const T inv = one / (one - q);
      for (int j = 0; 2 * j <= n; ++j) {
        at(n - 2 * j) = sign_pow<T>(j) * ipow(inv, j) * ipow(q, j * (j + 1) / 2) * q_binomial<T>(n - j, j, q);
      }
      return row;
    }
    case ConnectionPair::HermiteFromU: {
      const T inv = one / (one - q);
      for (int k = 0; 2 * k <= n; ++k) {
        at(n - 2 * k) = ipow(inv, k) * ipow(q, k) *
                        (q_binomial<T>(n, k, q) - ipow(q, n - 2 * k + 1) * q_binomial<T>(n, k - 1, q));
      }
      return row;
    }
    case ConnectionPair::RogersFromRogers:
      for (int k = 0; 2 * k <= n; ++k) at(n - 2 * k) = detail::rogers_coeff<T>(n, k, a.beta, a.gamma, q);
      return row;
    case ConnectionPair::RogersFromHermite:
      for (int k = 0; 2 * k <= n; ++k) {
        at(n - 2 * k) = sign_pow<T>(k) * ipow(a.gamma, k) * ipow(q, k * (k - 1) / 2) * q_factorial<T>(n, q) *
                        q_pochhammer<T>(a.gamma, q, n - k) / (q_factorial<T>(k, q) * q_factorial<T>(n - 2 * k, q));
      }
      return row;
    case ConnectionPair::HermiteFromRogers:
      for (int k = 0; 2 * k <= n; ++k) at(n - 2 * k) = detail::rogers_coeff<T>(n, k, a.beta, T(0), q);
      return row;
    case ConnectionPair::UFromAsc: {
      const std::vector<T> h = eval_all(Family<T>::qhermite(q), n, a.y);
      const T inv = one / (one - q);
      for (int k = 0; k <= n; ++k) {
        T s(0);
        for (int j = 0; 2 * j <= n - k; ++j) {
          const int m = n - k - 2 * j;
          s += sign_pow<T>(j) * ipow(inv, j) * ipow(q, j * (j + 1) / 2) * q_binomial<T>(n - j, n - k - j, q) *
               q_binomial<T>(n - k - j, m, q) * ipow(a.rho, m) * h[static_cast<std::size_t>(m)];
        }
        at(k) = s;
      }
      return row;
    }
    case ConnectionPair::KestenFromAsc: {
      if (n == 0) {
        at(0) = one;  // the general sum degenerates to 0 here
        return row;
      }
      const std::vector<T> h = eval_all(Family<T>::qhermite(q), n, a.y);
      const T inv = one / (one - q);
      const T r2 = a.rho * a.rho;
      for (int k = 0; k <= n; ++k) {
        T s(0);
        for (int j = 0; 2 * j <= n - k; ++j) {
          const int m = n - k - 2 * j;
          const T bracket = q_binomial<T>(j + k, k, q) - r2 * ipow(q, k) * q_binomial<T>(j + k - 1, k, q);
          s += sign_pow<T>(j) * ipow(inv, j) * ipow(q, n - k + j * (j - 3) / 2) * q_binomial<T>(n - 1 - j, m, q) *
               bracket * ipow(a.rho, m) * h[static_cast<std::size_t>(m)];
        }
        at(k) = s;
      }
      return row;
    }
    case ConnectionPair::TFromU:
      if (n == 0) {
        at(0) = one;
      } else if (n == 1) {
        at(1) = one / T(2);
      } else {
        at(n) = one / T(2);
        at(n - 2) = -one / T(2);
      }
      return row;
    case ConnectionPair::UFromT:
      for (int i = 0; 2 * i <= n; ++i) at(n - 2 * i) = T(2);
      if (n % 2 == 0) at(0) -= one;
      return row;
  }
  throw InvalidPair("unknown pair");
}

/// The full closed-form table up to n_max.
template <class T>
ConnectionMatrix<T> closed_form_matrix(ConnectionPair p, const PairParams<T>& a, int n_max) {
  ConnectionMatrix<T> m{source_family(p, a), target_family(p, a), n_max, {}};
  for (int n = 0; n <= n_max; ++n) m.rows.push_back(connect_closed_form(p, a, n));
  return m;
}

/// Multiplier taking a row entry (n, k) from the hat normalization used here
/// to the printed one: (1-q)^{n/2} for rescaled sources, (1-q)^{-k/2} for
/// rescaled targets. D_{k,n} and C_{k,n} are s^n times the hat values.
inline double printed_scale(ConnectionPair p, double q, int n, int k) {
  const auto hat = [](const Family<double>& f) {
    return f.tag == FamilyTag::ChebUHat || f.tag == FamilyTag::KestenHat;
  };
  PairParams<double> a;
  a.q = q;
  const double s = std::sqrt(1.0 - q);
  double scale = 1.0;
  if (hat(source_family(p, a))) scale *= std::pow(s, n);
  if (hat(target_family(p, a))) scale /= std::pow(s, k);
  return scale;
}

/// Exact coefficients by triangular back-substitution on coefficient vectors.
inline ConnectionMatrix<Rational> oracle_connection(const Family<Rational>& source, const Family<Rational>& target,
                                                    int n_max) {
  const std::vector<RationalPoly> a = coeffs_all(source, n_max);
  const std::vector<RationalPoly> b = coeffs_all(target, n_max);
  for (int k = 0; k <= n_max; ++k) {
    if (b[static_cast<std::size_t>(k)].degree() != k) {
      throw InvalidPair(std::string("target family ") + family_name(target.tag) + " has no member of degree " +
                        std::to_string(k) + " at these parameters");
    }
  }
  ConnectionMatrix<Rational> m{source, target, n_max, {}};
  for (int n = 0; n <= n_max; ++n) {
    RationalPoly r = a[static_cast<std::size_t>(n)];
    if (r.degree() > n) throw InvalidPair("source polynomial exceeds its index degree");
    std::vector<Rational> row(static_cast<std::size_t>(n) + 1, Rational(0));
    for (int k = n; k >= 0; --k) {
      const RationalPoly& bk = b[static_cast<std::size_t>(k)];
      const Rational g = r[k] / bk.leading();
      if (g != 0) {
        r -= bk * g;
        row[static_cast<std::size_t>(k)] = g;
      }
    }
    if (!r.is_zero()) throw InvalidPair("back-substitution left a nonzero remainder");
    m.rows.push_back(std::move(row));
  }
  return m;
}

inline ConnectionMatrix<Rational> oracle_connection(ConnectionPair p, const PairParams<Rational>& a, int n_max) {
  return oracle_connection(source_family(p, a), target_family(p, a), n_max);
}

/// sum_k gamma_{k,n} b_k, used to confirm a table reproduces the source.
inline RationalPoly reconstruct(const ConnectionMatrix<Rational>& m, int n) {
  const std::vector<RationalPoly> b = coeffs_all(m.target, n);
  RationalPoly out;
  for (int k = 0; k <= n; ++k) out += b[static_cast<std::size_t>(k)] * m.entry(n, k);
  return out;
}

/// CSV with columns n,k,numerator,denominator; zero entries omitted.
inline std::string to_csv(const ConnectionMatrix<Rational>& m) {
  std::ostringstream os;
  os << "n,k,numerator,denominator\n";
  for (int n = 0; n <= m.n_max; ++n) {
    for (int k = n; k >= 0; --k) {
      const Rational& g = m.rows[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
      if (g == 0) continue;
      os << n << ',' << k << ',' << g.get_num().get_str() << ',' << g.get_den().get_str() << '\n';
    }
  }
  return os.str();
}

/// Output of the ratio-driven construction.
struct RatioConnection {
  std::vector<Rational> f;        ///< f_0 = 1, sum_i f_{n-i} w_i = 0 for n >= 1
  std::vector<RationalPoly> phi;  ///< phi_n = sum_i f_{n-i} a_i
};

/// Given W = B/A = 1 + sum_{i>=1} w_i a_i / a-hat_i and the monic orthogonal
/// polynomials a_0..a_{n_max} of A, builds phi_n with int phi_n dB = 0 (n >= 1).
/// Entries of w beyond its size are zero.
inline RatioConnection ratio_connection(const std::vector<Rational>& w, const std::vector<RationalPoly>& a) {
  if (w.empty() || w[0] != 1) throw NonunitW0("ratio expansion needs w_0 = 1");
  const int n_max = static_cast<int>(a.size()) - 1;
  const auto wi = [&](int i) { return i < static_cast<int>(w.size()) ? w[static_cast<std::size_t>(i)] : Rational(0); };
  RatioConnection out;
  out.f.assign(static_cast<std::size_t>(n_max) + 1, Rational(0));
  if (n_max >= 0) out.f[0] = 1;
  for (int n = 1; n <= n_max; ++n) {
    Rational s(0);
    for (int i = 1; i <= n; ++i) s += out.f[static_cast<std::size_t>(n - i)] * wi(i);
    out.f[static_cast<std::size_t>(n)] = -s;
  }
  for (int n = 0; n <= n_max; ++n) {
    RationalPoly p;
    for (int i = 0; i <= n; ++i) p += a[static_cast<std::size_t>(i)] * out.f[static_cast<std::size_t>(n - i)];
    out.phi.push_back(std::move(p));
  }
  return out;
}

/// Same, taking the source family (normalized to monic).
inline RatioConnection ratio_connection(const std::vector<Rational>& w, const Family<Rational>& family, int n_max) {
  std::vector<RationalPoly> a = coeffs_all(family, n_max);
  for (auto& p : a) p = p.monic();
  return ratio_connection(w, a);
}

/// Largest n - k with a nonzero oracle entry over n <= n_max. Throws
/// BandViolation when it exceeds n_hint (the degree of the density ratio);
/// pass n_hint < 0 to only report.
inline int band_structure(const Family<Rational>& source, const Family<Rational>& target, int n_max, int n_hint = -1) {
  const ConnectionMatrix<Rational> m = oracle_connection(source, target, n_max);
  int band = 0;
  for (int n = 0; n <= n_max; ++n) {
    for (int k = 0; k <= n; ++k) {
      if (m.entry(n, k) != 0) band = std::max(band, n - k);
    }
  }
  if (n_hint >= 0 && band > n_hint) {
    throw BandViolation("band " + std::to_string(band) + " exceeds the ratio degree " + std::to_string(n_hint));
  }
  return band;
}

}  // namespace qortho
