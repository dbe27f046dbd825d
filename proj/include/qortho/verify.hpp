#pragma once

// Verification harness: orthogonality and norms by quadrature, projections,
// Chapman--Kolmogorov, the D-integral, exact special-value, degeneration and
// connection tables, sup bounds, expansions and q-series identities.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qortho/connect.hpp"
#include "qortho/densities.hpp"
#include "qortho/error.hpp"
#include "qortho/expand.hpp"
#include "qortho/polyfam.hpp"
#include "qortho/qcore.hpp"
#include "qortho/quadrature.hpp"
#include "qortho/rational.hpp"
#include "qortho/report.hpp"

namespace qortho {

/// Density with respect to which a family is orthogonal.
inline DensityId orthogonality_density(const Family<double>& f) {
  switch (f.tag) {
    case FamilyTag::QHermite: return DensityId::normal(f.q);
    case FamilyTag::ASC: return DensityId::conditional(f.y, f.rho, f.q);
    case FamilyTag::Rogers: return DensityId::rogers(f.beta, f.q);
    case FamilyTag::ChebUHat: return DensityId::semicircle(f.q);
    case FamilyTag::ChebTHat: return DensityId::arcsine(f.q);
    case FamilyTag::KestenHat: return DensityId::kesten(f.y, f.rho, f.q);
    case FamilyTag::Kesten: return DensityId::kesten(f.y, f.rho, 0.0);
    case FamilyTag::ClassicalHermite: return DensityId::normal(1.0);
    default:
      throw UnsupportedPair(std::string("no orthogonality density registered for ") + family_name(f.tag));
  }
}

namespace detail {

/// Half-width of the truncated line used for the Gaussian (q = 1) cases.
inline constexpr double kGaussianHalfWidth = 14.0;

inline QuadratureOptions quad_options(double tol) {
  QuadratureOptions opt;
  opt.tol = tol;
  return opt;
}

/// Vector integral of fill(x, root, out) against dx over S(q), or over
/// [-14, 14] when the density is Gaussian.
template <class Fill>
std::vector<double> integrate_on(const DensityId& d, Fill&& fill, std::size_t dim, const QuadratureOptions& opt,
                                 double* error) {
  if (!d.classical()) return integrate_vector(fill, dim, d.q, opt, error);
  std::vector<double> prev;
  for (int n = opt.initial_nodes; n <= opt.max_nodes; n *= 2) {
    const GaussLegendre& gl = gauss_legendre(n);
    std::vector<double> acc(dim, 0.0);
    std::vector<double> v(dim, 0.0);
    const double h = kGaussianHalfWidth;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      fill(h * gl.nodes[i], std::numeric_limits<double>::quiet_NaN(), v);
      for (std::size_t j = 0; j < dim; ++j) acc[j] += h * gl.weights[i] * v[j];
    }
    if (!prev.empty()) {
      double diff = 0.0;
      for (std::size_t j = 0; j < dim; ++j) diff = std::max(diff, std::abs(acc[j] - prev[j]));
      if (diff <= opt.tol) {
        if (error != nullptr) *error = diff;
        return acc;
      }
    }
    prev = std::move(acc);
  }
  throw Nonconvergence("quadrature on the line did not converge");
}

inline std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

/// Seeded uniform rationals p/d in (lo, hi), d <= max_den.
class RationalDraw {
 public:
  explicit RationalDraw(std::uint64_t seed) : rng_(seed) {}

  Rational operator()(double lo, double hi, int max_den = 17) {
    std::uniform_int_distribution<int> den(2, max_den);
    for (;;) {
      const int d = den(rng_);
      std::uniform_int_distribution<long> numer(static_cast<long>(std::floor(lo * d)) - 1,
                                                static_cast<long>(std::ceil(hi * d)) + 1);
      Rational r(numer(rng_), d);
      r.canonicalize();
      if (r > Rational(lo) && r < Rational(hi)) return r;
    }
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Quadrature checks

/// Gram matrix G[n][m] = int p_n p_m d, n, m <= n_max, in one quadrature pass.
inline std::vector<std::vector<double>> gram_matrix(const Family<double>& f, const DensityId& d, int n_max,
                                                    const QuadratureOptions& opt = {}, double* error = nullptr) {
  const std::size_t N = static_cast<std::size_t>(n_max) + 1;
  const auto fill = [&](double x, double root, std::vector<double>& out) {
    const std::vector<double> p = eval_all(f, n_max, x);
    const double w = density_eval(d, x, root);
    std::size_t idx = 0;
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t m = 0; m <= n; ++m) out[idx++] = p[n] * p[m] * w;
    }
  };
  const std::vector<double> flat = detail::integrate_on(d, fill, N * (N + 1) / 2, opt, error);
  std::vector<std::vector<double>> g(N, std::vector<double>(N));
  std::size_t idx = 0;
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t m = 0; m <= n; ++m) g[n][m] = g[m][n] = flat[idx++];
  }
  return g;
}

inline nlohmann::ordered_json family_params(const Family<double>& f) {
  nlohmann::ordered_json p;
  p["family"] = family_name(f.tag);
  p["q"] = f.q;
  if (f.tag == FamilyTag::Rogers) p["beta"] = f.beta;
  if (f.tag == FamilyTag::ASC || f.tag == FamilyTag::Kesten || f.tag == FamilyTag::KestenHat) {
    p["y"] = f.y;
    p["rho"] = f.rho;
  }
  return p;
}

/// |int p_n p_m d - delta_{nm} ||p_n||^2| with the closed-form norm.
inline VerificationReport check_orthogonality(const Family<double>& f, const DensityId& d, int n, int m,
                                              double tol = 1e-8) {
  auto params = family_params(f);
  params["n"] = n;
  params["m"] = m;
  const std::string id = "orthogonality/" + std::string(family_name(f.tag));
  try {
    double err = 0.0;
    const auto fill = [&](double x, double root, std::vector<double>& out) {
      const std::vector<double> p = eval_all(f, std::max(n, m), x);
      out[0] = p[static_cast<std::size_t>(n)] * p[static_cast<std::size_t>(m)] * density_eval(d, x, root);
    };
    const double value = detail::integrate_on(d, fill, 1, detail::quad_options(tol / 100.0), &err)[0];
    const double expected = n == m ? squared_norm(f, n) : 0.0;
    params["value"] = value;
    params["expected"] = expected;
    return VerificationReport::numeric(id, params, std::abs(value - expected), tol, err);
  } catch (const Error& e) {
    return VerificationReport::failed(id, params, tol, e.what());
  }
}

inline VerificationReport check_orthogonality(const Family<double>& f, int n, int m, double tol = 1e-8) {
  return check_orthogonality(f, orthogonality_density(f), n, m, tol);
}

/// Whole Gram matrix against the closed-form norms; the residual is the
/// largest entry error. With `normalized` the error of entry (n, m) is
/// divided by sqrt(||p_n||^2 ||p_m||^2).
inline VerificationReport check_gram(const std::string& id, const Family<double>& f, int n_max, double tol,
                                     bool normalized = false) {
  auto params = family_params(f);
  params["n_max"] = n_max;
  try {
    const DensityId d = orthogonality_density(f);
    std::vector<double> norm(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) norm[static_cast<std::size_t>(n)] = squared_norm(f, n);
    double err = 0.0;
    QuadratureOptions opt = detail::quad_options(tol / 100.0);
    if (normalized) opt.tol *= std::max(1.0, *std::max_element(norm.begin(), norm.end()));
    const auto g = gram_matrix(f, d, n_max, opt, &err);
    double worst = 0.0;
    int wn = 0, wm = 0;
    for (int n = 0; n <= n_max; ++n) {
      for (int m = 0; m <= n; ++m) {
        const auto un = static_cast<std::size_t>(n);
        const auto um = static_cast<std::size_t>(m);
        double e = std::abs(g[un][um] - (n == m ? norm[un] : 0.0));
        if (normalized) e /= std::sqrt(norm[un] * norm[um]);
        if (e > worst) {
          worst = e;
          wn = n;
          wm = m;
        }
      }
    }
    params["worst_n"] = wn;
    params["worst_m"] = wm;
    return VerificationReport::numeric(id, params, worst, tol, err, normalized);
  } catch (const Error& e) {
    return VerificationReport::failed(id, params, tol, e.what());
  }
}

/// int H_n(x|q) fCN(x|y,rho,q) dx against rho^n H_n(y|q).
inline VerificationReport check_projection(int n, double y, double rho, double q, double tol = 1e-8) {
  nlohmann::ordered_json params;
  params["n"] = n;
  params["y"] = y;
  params["rho"] = rho;
  params["q"] = q;
  try {
    const DensityId d = DensityId::conditional(y, rho, q);
    const Family<double> h = q == 1.0 ? Family<double>::classical_hermite() : Family<double>::qhermite(q);
    double err = 0.0;
    const auto fill = [&](double x, double root, std::vector<double>& out) {
      out[0] = eval(h, n, x) * density_eval(d, x, root);
    };
    const double value = detail::integrate_on(d, fill, 1, detail::quad_options(tol / 100.0), &err)[0];
    const double expected = std::pow(rho, n) * eval(h, n, y);
    return VerificationReport::numeric("projection", params, std::abs(value - expected), tol, err);
  } catch (const Error& e) {
    return VerificationReport::failed("projection", params, tol, e.what());
  }
}

/// Largest projection residual over n <= n_max for one (y, rho, q).
inline VerificationReport check_projection_all(const std::string& id, int n_max, double y, double rho, double q,
                                               double tol = 1e-8) {
  nlohmann::ordered_json params;
  params["y"] = y;
  params["rho"] = rho;
  params["q"] = q;
  params["n_max"] = n_max;
  try {
    const DensityId d = DensityId::conditional(y, rho, q);
    const Family<double> h = Family<double>::qhermite(q);
    const std::size_t N = static_cast<std::size_t>(n_max) + 1;
    double err = 0.0;
    const auto fill = [&](double x, double root, std::vector<double>& out) {
      const std::vector<double> p = eval_all(h, n_max, x);
      const double w = density_eval(d, x, root);
      for (std::size_t n = 0; n < N; ++n) out[n] = p[n] * w;
    };
    const std::vector<double> v = detail::integrate_on(d, fill, N, detail::quad_options(tol / 100.0), &err);
    const std::vector<double> hy = eval_all(h, n_max, y);
    double worst = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      worst = std::max(worst, std::abs(v[n] - std::pow(rho, static_cast<double>(n)) * hy[n]));
    }
    return VerificationReport::numeric(id, params, worst, tol, err);
  } catch (const Error& e) {
    return VerificationReport::failed(id, params, tol, e.what());
  }
}

/// int fCN(x|y,rho1,q) fCN(y|z,rho2,q) dy against fCN(x|z,rho1 rho2,q).
inline VerificationReport check_chapman(double x, double z, double rho1, double rho2, double q, double tol = 1e-6,
                                        const std::string& id = "chapman") {
  nlohmann::ordered_json params;
  params["x"] = x;
  params["z"] = z;
  params["rho1"] = rho1;
  params["rho2"] = rho2;
  params["q"] = q;
  try {
    const double rhs = density_eval(DensityId::conditional(z, rho1 * rho2, q), x);
    QuadratureResult r;
    const QuadratureOptions opt = detail::quad_options(tol / 100.0);
    if (q == 1.0) {
      const double c = rho2 * z;
      r = integrate_interval(
          [&](double y) {
            return density_eval(DensityId::conditional(y, rho1, 1.0), x) *
                   density_eval(DensityId::conditional(z, rho2, 1.0), y);
          },
          c - detail::kGaussianHalfWidth, c + detail::kGaussianHalfWidth, opt);
    } else {
      const DensityId second = DensityId::conditional(z, rho2, q);
      r = integrate(
          [&](double y, double root) {
            return density_eval(DensityId::conditional(y, rho1, q), x) * density_eval(second, y, root);
          },
          q, opt);
    }
    params["lhs"] = r.value;
    params["rhs"] = rhs;
    return VerificationReport::numeric(id, params, std::abs(r.value - rhs), tol, r.error);
  } catch (const Error& e) {
    return VerificationReport::failed(id, params, tol, e.what());
  }
}

namespace detail {

/// Values of int U_n(x s/2) P_k(x) fCN dx and s^n D-hat_{k,n} (rho^2)_k [k]!
/// for 0 <= k <= n <= n_max, flattened row by row.
inline std::pair<std::vector<double>, std::vector<double>> d_integrals(int n_max, double y, double rho, double q,
                                                                         double qtol, double* error) {
  const DensityId d = DensityId::conditional(y, rho, q);
  const Family<double> p = Family<double>::asc(y, rho, q);
  const double s = std::sqrt(1.0 - q);
  const std::size_t N = static_cast<std::size_t>(n_max) + 1;
  const auto fill = [&](double x, double root, std::vector<double>& out) {
    const std::vector<double> u = eval_all(Family<double>::cheb_u(), n_max, x * s / 2.0);
    const std::vector<double> pk = eval_all(p, n_max, x);
    const double w = density_eval(d, x, root);
    std::size_t idx = 0;
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t k = 0; k <= n; ++k) out[idx++] = u[n] * pk[k] * w;
    }
  };
  std::vector<double> lhs = integrate_vector(fill, N * (N + 1) / 2, q, quad_options(qtol), error);
  PairParams<double> a;
  a.q = q;
  a.y = y;
  a.rho = rho;
  std::vector<double> rhs;
  rhs.reserve(lhs.size());
  for (int n = 0; n <= n_max; ++n) {
    const std::vector<double> row = connect_closed_form(ConnectionPair::UFromAsc, a, n);
    for (int k = 0; k <= n; ++k) {
      rhs.push_back(std::pow(s, n) * row[static_cast<std::size_t>(k)] * q_pochhammer<double>(rho * rho, q, k) *
                    q_factorial<double>(k, q));
    }
  }
  return {std::move(lhs), std::move(rhs)};
}

}  // namespace detail

/// int U_n(x sqrt(1-q)/2) P_k(x|y,rho,q) fCN(x|y,rho,q) dx = D_{k,n}(y,rho,q) (rho^2)_k [k]!.
inline VerificationReport check_D_integral(int k, int n, double y, double rho, double q, double tol = 1e-8) {
  nlohmann::ordered_json params;
  params["k"] = k;
  params["n"] = n;
  params["y"] = y;
  params["rho"] = rho;
  params["q"] = q;
  if (k < 0 || k > n) throw InvalidParameter("check_D_integral needs 0 <= k <= n");
  try {
    double err = 0.0;
    const auto [lhs, rhs] = detail::d_integrals(n, y, rho, q, tol / 100.0, &err);
    const std::size_t idx = static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) + 1) / 2 + static_cast<std::size_t>(k);
    params["lhs"] = lhs[idx];
    params["rhs"] = rhs[idx];
    return VerificationReport::numeric("dintegral", params, std::abs(lhs[idx] - rhs[idx]), tol, err);
  } catch (const Error& e) {
    return VerificationReport::failed("dintegral", params, tol, e.what());
  }
}

// ---------------------------------------------------------------------------
// Exact tables

/// Tabulated special values against the recurrence, n <= n_max, on
/// `draws` random rational parameter sets.
inline std::vector<VerificationReport> special_value_reports(int n_max = 20, int draws = 6, std::uint64_t seed = 24) {
  using F = Family<Rational>;
  detail::RationalDraw draw(seed);
  long u = 0, h0 = 0, hedge = 0, k = 0, b = 0, r = 0;
  const auto at = [](const F& f, int n, const Rational& x) { return eval<Rational, Rational>(f, n, x); };
  for (int n = 0; n <= n_max; ++n) {
    const F cu = F::cheb_u();
    u += special_value(cu, n, SpecialPoint::Zero) != at(cu, n, Rational(0));
    u += special_value(cu, n, SpecialPoint::One) != at(cu, n, Rational(1));
    u += special_value(cu, n, SpecialPoint::One) != sign_pow<Rational>(n) * at(cu, n, Rational(-1));
    u += special_value(cu, n, SpecialPoint::Half) != at(cu, n, Rational(1, 2));
  }
  for (int t = 0; t < draws; ++t) {
    const Rational q = draw(-1, 1);
    const Rational y = draw(-2, 2);
    const Rational rho = draw(-1, 1);
    const Rational beta = draw(-1, 1);
    const F h = F::qhermite(q);
    // (1-q)^{n/2} H_n(2/sqrt(1-q)) from the rescaled recurrence h_{n+1} = 2 h_n - (1 - q^n) h_{n-1}
    Rational prev(0), cur(1);
    for (int n = 0; n <= n_max; ++n) {
      h0 += special_value(h, n, SpecialPoint::Zero) != at(h, n, Rational(0));
      hedge += special_value(h, n, SpecialPoint::Edge) != cur;
      const Rational next = Rational(2) * cur - (Rational(1) - ipow(q, n)) * prev;
      prev = cur;
      cur = next;
      const F kf = F::kesten(y, rho);
      k += special_value(kf, n, SpecialPoint::Zero) != at(kf, n, Rational(0));
      k += special_value(kf, n, SpecialPoint::One) != at(kf, n, Rational(1));
      const F bf = F::big_b(q);
      b += special_value(bf, n, SpecialPoint::Zero) != at(bf, n, Rational(0));
      const F rf = F::rogers(beta, q);
      r += special_value(rf, n, SpecialPoint::Zero) != at(rf, n, Rational(0));
    }
  }
  nlohmann::ordered_json p;
  p["n_max"] = n_max;
  p["draws"] = draws;
  return {
      VerificationReport::exact_check("special/chebu", p, u),
      VerificationReport::exact_check("special/qhermite-zero", p, h0),
      VerificationReport::exact_check("special/qhermite-edge", p, hedge),
      VerificationReport::exact_check("special/kesten", p, k),
      VerificationReport::exact_check("special/bigb-zero", p, b),
      VerificationReport::exact_check("special/rogers-zero", p, r),
  };
}

/// Polynomial degenerations, exact on rationals for n <= n_max.
inline std::vector<VerificationReport> degeneration_reports(int n_max = 20, int draws = 5, std::uint64_t seed = 23) {
  using F = Family<Rational>;
  detail::RationalDraw draw(seed);
  long r0 = 0, p0 = 0, pk = 0, h0 = 0, h1 = 0, diag = 0, p1 = 0;
  const std::vector<RationalPoly> he = coeffs_all(F::classical_hermite(), n_max);
  const std::vector<RationalPoly> hq1 = coeffs_all(F::qhermite(Rational(1)), n_max);
  const std::vector<RationalPoly> h_0 = coeffs_all(F::qhermite(Rational(0)), n_max);
  const std::vector<RationalPoly> u = coeffs_all(F::cheb_u(), n_max);
  for (int n = 0; n <= n_max; ++n) {
    const auto i = static_cast<std::size_t>(n);
    h0 += h_0[i] != u[i].rescaled(Rational(1, 2));
    h1 += hq1[i] != he[i];
  }
  for (int t = 0; t < draws; ++t) {
    const Rational q = draw(-1, 1);
    const Rational y = draw(-2, 2);
    const Rational rho = draw(-1, 1);
    const auto h = coeffs_all(F::qhermite(q), n_max);
    const auto rb0 = coeffs_all(F::rogers(Rational(0), q), n_max);
    const auto pr0 = coeffs_all(F::asc(y, Rational(0), q), n_max);
    const auto pq0 = coeffs_all(F::asc(y, rho, Rational(0)), n_max);
    const auto kf = coeffs_all(F::kesten(y, rho), n_max);
    const auto rr = coeffs_all(F::rogers(rho, q), n_max);
    const auto pq1 = coeffs_all(F::asc(y, rho, Rational(1)), n_max);
    // (1 - rho^2)^{n/2} He_n((x - rho y)/sqrt(1 - rho^2)): only n - m even powers occur
    const Rational v = Rational(1) - rho * rho;
    const RationalPoly shift{Rational(-rho * y), Rational(1)};
    for (int n = 0; n <= n_max; ++n) {
      const auto i = static_cast<std::size_t>(n);
      r0 += rb0[i] != h[i];
      p0 += pr0[i] != h[i];
      pk += pq0[i] != kf[i];
      for (const Rational& x : {Rational(1, 3), Rational(-5, 4), Rational(2)}) {
        diag += eval<Rational, Rational>(F::asc(x, rho, q), n, x) != rr[i].evaluate(x);
      }
      RationalPoly gauss;
      RationalPoly power = RationalPoly::constant(Rational(1));
      for (int m = 0; m <= n; ++m) {
        if ((n - m) % 2 == 0) gauss += power * (he[i][m] * ipow(v, (n - m) / 2));
        power = power * shift;
      }
      p1 += pq1[i] != gauss;
    }
  }
  nlohmann::ordered_json p;
  p["n_max"] = n_max;
  p["draws"] = draws;
  return {
      VerificationReport::exact_check("degenerations/rogers-beta0-qhermite", p, r0),
      VerificationReport::exact_check("degenerations/asc-rho0-qhermite", p, p0),
      VerificationReport::exact_check("degenerations/asc-q0-kesten", p, pk),
      VerificationReport::exact_check("degenerations/qhermite-q0-chebu", p, h0),
      VerificationReport::exact_check("degenerations/qhermite-q1-hermite", p, h1),
      VerificationReport::exact_check("degenerations/asc-diagonal-rogers", p, diag),
      VerificationReport::exact_check("degenerations/asc-q1-gaussian", p, p1),
  };
}

/// Density degenerations at special parameters, pointwise in floating point.
inline std::vector<VerificationReport> density_degeneration_reports(const std::vector<double>& q_grid,
                                                                    double tol = 1e-12) {
  std::vector<VerificationReport> out;
  double semicircle = 0.0, gauss = 0.0, gauss_cn = 0.0;
  for (int i = -19; i <= 19; ++i) {
    const double x = i / 10.0;
    semicircle = std::max(semicircle, std::abs(density_eval(DensityId::normal(0.0), x) -
                                               std::sqrt(4.0 - x * x) / (2.0 * std::numbers::pi)));
    gauss = std::max(gauss, std::abs(density_eval(DensityId::normal(1.0), 2.5 * x) -
                                     std::exp(-6.25 * x * x / 2.0) / std::sqrt(2.0 * std::numbers::pi)));
    const double rho = 0.6, y = 0.7;
    const double v = 1.0 - rho * rho;
    const double xx = 2.5 * x;
    gauss_cn = std::max(gauss_cn, std::abs(density_eval(DensityId::conditional(y, rho, 1.0), xx) -
                                           std::exp(-(xx - rho * y) * (xx - rho * y) / (2.0 * v)) /
                                               std::sqrt(2.0 * std::numbers::pi * v)));
  }
  out.push_back(VerificationReport::numeric("degenerations/fN-q0-semicircle", {}, semicircle, tol));
  out.push_back(VerificationReport::numeric("degenerations/fN-q1-gaussian", {}, gauss, tol));
  out.push_back(VerificationReport::numeric("degenerations/fCN-q1-gaussian", {}, gauss_cn, tol));
  for (double q : q_grid) {
    const double L = support_radius(q);
    double cn0 = 0.0, r1 = 0.0, r0 = 0.0;
    for (int i = -19; i <= 19; ++i) {
      const double x = L * i / 20.0;
      const double fn = density_eval(DensityId::normal(q), x);
      cn0 = std::max(cn0, relative_residual(density_eval(DensityId::conditional(0.4 * L, 0.0, q), x), fn));
      r0 = std::max(r0, relative_residual(density_eval(DensityId::rogers(0.0, q), x), fn));
      r1 = std::max(r1, relative_residual(density_eval(DensityId::rogers(1.0, q), x),
                                          density_eval(DensityId::arcsine(q), x)));
    }
    nlohmann::ordered_json p;
    p["q"] = q;
    out.push_back(VerificationReport::numeric("degenerations/fCN-rho0-fN/q=" + detail::num(q), p, cn0, tol, 0, true));
    out.push_back(VerificationReport::numeric("degenerations/fR-beta0-fN/q=" + detail::num(q), p, r0, tol, 0, true));
    out.push_back(VerificationReport::numeric("degenerations/fR-beta1-fT/q=" + detail::num(q), p, r1, tol, 0, true));
  }
  return out;
}

/// sup |p_n| on a 4001-point grid of S(q) against max_bound, n <= n_max.
/// Residual: the largest relative excess max(0, sup/bound - 1).
inline VerificationReport check_max_bound(FamilyTag tag, double q, double beta, int n_max, double tol = 1e-12) {
  nlohmann::ordered_json p;
  p["family"] = family_name(tag);
  p["q"] = q;
  if (tag == FamilyTag::Rogers) p["beta"] = beta;
  p["n_max"] = n_max;
  const std::string id = "maxbound/" + std::string(family_name(tag)) + "/q=" + detail::num(q) +
                         (tag == FamilyTag::Rogers ? ",beta=" + detail::num(beta) : std::string());
  try {
    const Family<double> f = tag == FamilyTag::Rogers ? Family<double>::rogers(beta, q) : Family<double>::qhermite(q);
    const SupportInterval s = support(q);
    std::vector<double> worst(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (int i = 0; i <= 4000; ++i) {
      const double x = s.lo + (s.hi - s.lo) * i / 4000.0;
      const std::vector<double> v = eval_all(f, n_max, x);
      for (std::size_t n = 0; n < worst.size(); ++n) worst[n] = std::max(worst[n], std::abs(v[n]));
    }
    double excess = 0.0;
    for (int n = 0; n <= n_max; ++n) {
      excess = std::max(excess, worst[static_cast<std::size_t>(n)] / max_bound(tag, n, q, beta) - 1.0);
    }
    return VerificationReport::numeric(id, p, std::max(0.0, excess), tol, 0.0, true);
  } catch (const Error& e) {
    return VerificationReport::failed(id, p, tol, e.what());
  }
}

/// Every closed-form connection table against the oracle, exactly, with the
/// reconstruction sum_k gamma_{k,n} b_k = a_n.
inline std::vector<VerificationReport> connect_exact_reports(int n_max = 12, int draws = 20, std::uint64_t seed = 31) {
  std::vector<VerificationReport> out;
  detail::RationalDraw draw(seed);
  std::vector<PairParams<Rational>> settings;
  for (int t = 0; t < draws; ++t) {
    PairParams<Rational> a;
    a.q = draw(-1, 1);
    a.y = draw(-2, 2);
    a.rho = draw(-1, 1);
    a.beta = draw(-1, 1);
    a.gamma = draw(-1, 1);
    settings.push_back(a);
  }
  for (ConnectionPair pair : kAllPairs) {
    long mismatches = 0;
    std::string error;
    for (const auto& a : settings) {
      try {
        const ConnectionMatrix<Rational> oracle = oracle_connection(pair, a, n_max);
        const std::vector<RationalPoly> src = coeffs_all(oracle.source, n_max);
        for (int n = 0; n <= n_max; ++n) {
          mismatches += connect_closed_form(pair, a, n) != oracle.rows[static_cast<std::size_t>(n)];
          mismatches += reconstruct(oracle, n) != src[static_cast<std::size_t>(n)];
        }
      } catch (const Error& e) {
        error = e.what();
      }
    }
    nlohmann::ordered_json p;
    p["pair"] = pair_name(pair);
    p["n_max"] = n_max;
    p["draws"] = draws;
    const std::string id = std::string("connect/") + pair_name(pair);
    out.push_back(error.empty() ? VerificationReport::exact_check(id, p, mismatches)
                                : VerificationReport::failed(id, p, 0.0, error));
  }
  return out;
}

/// The arcsine/semicircle instance of the ratio construction, its two
/// reconstruction identities, and the band widths of T/U and Kesten/U.
inline std::vector<VerificationReport> ratio_construction_reports(int n_max = 10) {
  using F = Family<Rational>;
  std::vector<VerificationReport> out;
  // monic T on (-1, 1) against the semicircle weight: w = 1 - (1/4) a_2/a-hat_2
  const std::vector<Rational> w{1, 0, Rational(-1, 4)};
  const RatioConnection rc = ratio_connection(w, F::cheb_t(), n_max);
  const RationalPoly phi4{Rational(1, 16), 0, Rational(-3, 4), 0, 1};
  out.push_back(VerificationReport::exact_check("connect/ratio/phi4", {{"expected", "x^4 - 3x^2/4 + 1/16"}},
                                                rc.phi[4] != phi4));
  // (i) phi_n orthogonal to 1 under the semicircle: moments m_{2k} = Catalan(k)/4^k
  const auto moment = [](int j) -> Rational {
    if (j % 2 != 0) return Rational(0);
    Rational c(1);
    for (int i = 0; i < j / 2; ++i) c = c * Rational(2 * (2 * i + 1), i + 2);
    return Rational(c / ipow(Rational(4), j / 2));
  };
  long orth = 0, recon = 0;
  std::vector<RationalPoly> a = coeffs_all(F::cheb_t(), n_max);
  for (auto& poly : a) poly = poly.monic();
  for (int n = 0; n <= n_max; ++n) {
    const RationalPoly& ph = rc.phi[static_cast<std::size_t>(n)];
    if (n >= 1) {
      Rational s(0);
      for (int j = 0; j <= ph.degree(); ++j) s += ph[j] * moment(j);
      orth += s != 0;
    }
    // (ii) sum_i w_i phi_{n-i} = a_n
    RationalPoly s;
    for (int i = 0; i <= std::min(n, 2); ++i) s += rc.phi[static_cast<std::size_t>(n - i)] * w[static_cast<std::size_t>(i)];
    recon += s != a[static_cast<std::size_t>(n)];
  }
  nlohmann::ordered_json p;
  p["n_max"] = n_max;
  out.push_back(VerificationReport::exact_check("connect/ratio/orthogonality", p, orth));
  out.push_back(VerificationReport::exact_check("connect/ratio/reconstruction", p, recon));
  const auto band = [&](const std::string& id, const F& src, const F& tgt) {
    try {
      const int b = band_structure(src, tgt, n_max);
      nlohmann::ordered_json bp;
      bp["band"] = b;
      out.push_back(VerificationReport::exact_check(id, bp, b != 2));
    } catch (const Error& e) {
      out.push_back(VerificationReport::failed(id, {}, 0.0, e.what()));
    }
  };
  band("connect/band/t-over-u", F::cheb_t(), F::cheb_u());
  band("connect/band/kesten-over-u", F::kesten(Rational(1, 2), Rational(1, 3)), F::cheb_u_hat(Rational(0)));
  return out;
}

// ---------------------------------------------------------------------------
// Expansions against densities

/// Largest |base * series - target| on an interior grid of `points` nodes.
inline VerificationReport check_expansion(ExpansionId id, const ExpansionParams<double>& p, int points = 11,
                                          double tol = 1e-7, int k_max = 500) {
  nlohmann::ordered_json params;
  params["expansion"] = expansion_name(id);
  params["q"] = effective_q(id, p);
  params["y"] = p.y;
  params["rho"] = p.rho;
  params["beta"] = p.beta;
  const std::string cid = std::string("expansion/") + expansion_name(id) + "/q=" + detail::num(p.q) +
                          ",y=" + detail::num(p.y) + ",rho=" + detail::num(p.rho) + ",beta=" + detail::num(p.beta);
  try {
    const ExpansionSeries series(id, p, k_max);
    const DensityId target = expansion_target(id, p);
    const double L = id == ExpansionId::MehlerClassical ? 5.0 : support_radius(effective_q(id, p));
    double worst = 0.0;
    double bound = 0.0;
    int terms = 0;
    for (int i = 0; i < points; ++i) {
      const double x = L * (-1.0 + 2.0 * (i + 1.0) / (points + 1.0));
      const ExpansionValue v = expansion_eval(series, x);
      worst = std::max(worst, std::abs(v.value - density_eval(target, x)));
      bound = std::max(bound, v.tail_bound);
      terms = std::max(terms, v.terms);
    }
    params["terms"] = terms;
    return VerificationReport::numeric(cid, params, worst, tol, bound);
  } catch (const Error& e) {
    return VerificationReport::failed(cid, params, tol, e.what());
  }
}

/// Partial Poisson--Mehler sums times fN against fCN on an n x n grid of S(q)^2.
inline VerificationReport check_poisson_mehler_grid(double q, double rho, int n, double tol = 1e-8) {
  nlohmann::ordered_json params;
  params["q"] = q;
  params["rho"] = rho;
  params["grid"] = n;
  const std::string id = "expansion/poisson-mehler-grid/q=" + detail::num(q) + ",rho=" + detail::num(rho);
  try {
    const double L = support_radius(q);
    double worst = 0.0, bound = 0.0;
    for (int j = 0; j < n; ++j) {
      const double y = L * (-1.0 + 2.0 * (j + 1.0) / (n + 1.0));
      ExpansionParams<double> p;
      p.q = q;
      p.y = y;
      p.rho = rho;
      const ExpansionSeries s(ExpansionId::CNOverN, p);
      const DensityId cn = DensityId::conditional(y, rho, q);
      for (int i = 0; i < n; ++i) {
        const double x = L * (-1.0 + 2.0 * (i + 1.0) / (n + 1.0));
        const ExpansionValue v = expansion_eval(s, x);
        worst = std::max(worst, std::abs(v.value - density_eval(cn, x)));
        bound = std::max(bound, v.tail_bound);
      }
    }
    return VerificationReport::numeric(id, params, worst, tol, bound);
  } catch (const Error& e) {
    return VerificationReport::failed(id, params, tol, e.what());
  }
}

// ---------------------------------------------------------------------------
// The full registry

struct VerifyConfig {
  std::vector<double> q_grid{-0.5, 0.0, 0.3, 0.7};
  int n_max = 10;
  double tol = 1e-8;              ///< single quadrature checks
  double tol_nested = 1e-6;       ///< Chapman--Kolmogorov
  double tol_expansion = 1e-7;
  std::vector<std::array<double, 2>> y_rho{{0.0, 0.5}, {1.0, 0.3}};
  std::vector<double> betas{0.2, 0.6};
  int exact_n_max = 20;
  int connect_n_max = 12;
  int connect_draws = 20;
  std::array<double, 3> chapman{0.5, 0.4, 0.3};  ///< rho1, rho2, q
  int chapman_grid = 5;
  IdentityConfig identities;
  /// check-id prefixes to run; empty runs everything
  std::vector<std::string> select;
  bool parallel = true;
};

/// Group names, in the order run_all executes them.
inline const std::vector<std::string>& check_groups() {
  static const std::vector<std::string> groups{
      "connect",  "degenerations", "dintegral",  "expansion",     "identity",
      "maxbound", "normalization", "orthogonality", "projection", "special", "chapman",
  };
  return groups;
}

namespace detail {

inline bool selected(const std::vector<std::string>& select, const std::string& id) {
  if (select.empty()) return true;
  return std::any_of(select.begin(), select.end(), [&](const std::string& s) { return id.rfind(s, 0) == 0; });
}

inline bool group_selected(const std::vector<std::string>& select, const std::string& group) {
  if (select.empty()) return true;
  return std::any_of(select.begin(), select.end(),
                     [&](const std::string& s) { return s.rfind(group, 0) == 0 || group.rfind(s, 0) == 0; });
}

inline std::vector<VerificationReport> run_group(const std::string& g, const VerifyConfig& c) {
  std::vector<VerificationReport> out;
  const auto tag = [](double q) { return "q=" + num(q); };
  if (g == "orthogonality") {
    for (double q : c.q_grid) {
      out.push_back(check_gram("orthogonality/qhermite/" + tag(q), Family<double>::qhermite(q), c.n_max, c.tol));
      for (const auto& yr : c.y_rho) {
        out.push_back(check_gram("orthogonality/asc/" + tag(q) + ",y=" + num(yr[0]) + ",rho=" + num(yr[1]),
                                 Family<double>::asc(yr[0], yr[1], q), c.n_max, c.tol));
      }
      for (double b : c.betas) {
        out.push_back(check_gram("orthogonality/rogers/" + tag(q) + ",beta=" + num(b), Family<double>::rogers(b, q),
                                 c.n_max, c.tol));
      }
      // rescaled Chebyshev and Kesten families: errors relative to the norms
      out.push_back(check_gram("orthogonality/chebu-hat/" + tag(q), Family<double>::cheb_u_hat(q), c.n_max, c.tol, true));
      out.push_back(check_gram("orthogonality/chebt-hat/" + tag(q), Family<double>::cheb_t_hat(q), c.n_max, c.tol, true));
      for (const auto& yr : c.y_rho) {
        out.push_back(check_gram("orthogonality/kesten-hat/" + tag(q) + ",y=" + num(yr[0]) + ",rho=" + num(yr[1]),
                                 Family<double>::kesten_hat(yr[0], yr[1], q), c.n_max, c.tol, true));
      }
    }
    out.push_back(check_gram("orthogonality/hermite/q=1", Family<double>::classical_hermite(), c.n_max, c.tol, true));
  } else if (g == "normalization") {
    for (double q : c.q_grid) {
      std::vector<std::pair<std::string, DensityId>> ds{
          {"fN", DensityId::normal(q)}, {"fU", DensityId::semicircle(q)}, {"fT", DensityId::arcsine(q)}};
      for (const auto& yr : c.y_rho) {
        ds.emplace_back("fCN,y=" + num(yr[0]) + ",rho=" + num(yr[1]), DensityId::conditional(yr[0], yr[1], q));
        ds.emplace_back("fK,y=" + num(yr[0]) + ",rho=" + num(yr[1]), DensityId::kesten(yr[0], yr[1], q));
      }
      for (double b : c.betas) ds.emplace_back("fR,beta=" + num(b), DensityId::rogers(b, q));
      for (const auto& [name, d] : ds) {
        nlohmann::ordered_json p;
        p["density"] = density_name(d.tag);
        p["q"] = q;
        const std::string id = "normalization/" + name + "," + tag(q);
        try {
          out.push_back(VerificationReport::numeric(id, p, normalize_check(d, c.tol / 100.0), c.tol));
        } catch (const Error& e) {
          out.push_back(VerificationReport::failed(id, p, c.tol, e.what()));
        }
      }
    }
  } else if (g == "projection") {
    for (double q : c.q_grid) {
      for (const auto& yr : c.y_rho) {
        out.push_back(check_projection_all("projection/" + tag(q) + ",y=" + num(yr[0]) + ",rho=" + num(yr[1]),
                                           c.n_max, yr[0], yr[1], q, c.tol));
      }
      out.push_back(check_projection_all("projection/" + tag(q) + ",y=0.5,rho=0", c.n_max, 0.5, 0.0, q, c.tol));
    }
  } else if (g == "chapman") {
    const auto [r1, r2, q] = c.chapman;
    const double L = support_radius(q);
    const int n = c.chapman_grid;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double x = L * (-0.8 + 1.6 * i / std::max(1, n - 1));
        const double z = L * (-0.8 + 1.6 * j / std::max(1, n - 1));
        out.push_back(check_chapman(x, z, r1, r2, q, c.tol_nested,
                                    "chapman/" + tag(q) + ",x=" + num(x) + ",z=" + num(z)));
      }
    }
    for (double x : {-1.5, 0.0, 0.8}) {
      out.push_back(check_chapman(x, 0.6, r1, r2, 1.0, c.tol_nested, "chapman/q=1,x=" + num(x) + ",z=0.6"));
    }
    out.push_back(check_chapman(0.3, -0.9, 0.0, r2, q, c.tol_nested, "chapman/rho1=0," + tag(q)));
  } else if (g == "dintegral") {
    for (double q : c.q_grid) {
      for (const auto& yr : c.y_rho) {
        nlohmann::ordered_json p;
        p["q"] = q;
        p["y"] = yr[0];
        p["rho"] = yr[1];
        p["n_max"] = c.n_max;
        const std::string id = "dintegral/" + tag(q) + ",y=" + num(yr[0]) + ",rho=" + num(yr[1]);
        try {
          double err = 0.0;
          const auto [lhs, rhs] = d_integrals(c.n_max, yr[0], yr[1], q, c.tol / 100.0, &err);
          double worst = 0.0;
          for (std::size_t i = 0; i < lhs.size(); ++i) worst = std::max(worst, std::abs(lhs[i] - rhs[i]));
          out.push_back(VerificationReport::numeric(id, p, worst, c.tol, err));
        } catch (const Error& e) {
          out.push_back(VerificationReport::failed(id, p, c.tol, e.what()));
        }
      }
    }
  } else if (g == "special") {
    out = special_value_reports(c.exact_n_max);
  } else if (g == "degenerations") {
    out = degeneration_reports(c.exact_n_max);
    for (auto& r : density_degeneration_reports(c.q_grid)) out.push_back(std::move(r));
  } else if (g == "maxbound") {
    for (double q : c.q_grid) {
      out.push_back(check_max_bound(FamilyTag::QHermite, q, 0.0, c.exact_n_max));
      for (double b : c.betas) {
        out.push_back(check_max_bound(FamilyTag::Rogers, q, b, c.exact_n_max));
        out.push_back(check_max_bound(FamilyTag::Rogers, q, -b, c.exact_n_max));
      }
    }
  } else if (g == "identity") {
    out = identity_suite(c.identities);
  } else if (g == "connect") {
    out = connect_exact_reports(c.connect_n_max, c.connect_draws);
    for (auto& r : ratio_construction_reports()) out.push_back(std::move(r));
  } else if (g == "expansion") {
    const auto mk = [](double q, double y, double rho, double beta) {
      ExpansionParams<double> p;
      p.q = q;
      p.y = y;
      p.rho = rho;
      p.beta = beta;
      return p;
    };
    for (ExpansionId id : kAllExpansions) {
      out.push_back(check_expansion(id, mk(0.3, 0.5, 0.5, 0.4), 11, c.tol_expansion));
      out.push_back(check_expansion(id, mk(-0.5, -0.8, -0.6, -0.5), 11, c.tol_expansion));
    }
    for (const auto& s : std::vector<std::array<double, 2>>{{0.3, 0.5}, {0.7, 0.4}, {-0.5, 0.6}}) {
      out.push_back(check_poisson_mehler_grid(s[0], s[1], 21, c.tol));
    }
  }
  return out;
}

}  // namespace detail

/// Runs every selected check group; reports are filtered by the selection
/// prefixes and sorted by check id.
inline std::vector<VerificationReport> run_all(const VerifyConfig& config = {}) {
  std::vector<std::string> groups;
  for (const std::string& g : check_groups()) {
    if (detail::group_selected(config.select, g)) groups.push_back(g);
  }
  std::vector<VerificationReport> all;
  if (config.parallel) {
    std::vector<std::future<std::vector<VerificationReport>>> jobs;
    for (const std::string& g : groups) {
      jobs.push_back(std::async(std::launch::async, [g, &config] { return detail::run_group(g, config); }));
    }
    for (auto& j : jobs) {
      for (auto& r : j.get()) all.push_back(std::move(r));
    }
  } else {
    for (const std::string& g : groups) {
      for (auto& r : detail::run_group(g, config)) all.push_back(std::move(r));
    }
  }
  std::vector<VerificationReport> kept;
  for (auto& r : all) {
    if (detail::selected(config.select, r.check_id)) kept.push_back(std::move(r));
  }
  sort_reports(kept);
  return kept;
}

}  // namespace qortho
