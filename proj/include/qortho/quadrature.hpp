#pragma once

// Gauss--Legendre quadrature in theta after the substitution
// x = (2/sqrt(1-q)) cos(theta), theta in [0, pi].

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <type_traits>
#include <vector>

#include "qortho/error.hpp"
#include "qortho/qcore.hpp"

namespace qortho {

/// Nodes and weights of the N-point Gauss--Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussLegendre make_gauss_legendre(int n) {
  if (n < 1) throw InvalidParameter("Gauss-Legendre rule needs n >= 1");
  GaussLegendre r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute the derivative at the converged node
    double p0 = 1.0;
    double p1 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.nodes[static_cast<std::size_t>(i)] = -z;
    r.nodes[static_cast<std::size_t>(n - 1 - i)] = z;
    r.weights[static_cast<std::size_t>(i)] = w;
    r.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return r;
}

/// Cached rule; safe to call from several threads.
inline const GaussLegendre& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussLegendre>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussLegendre>(make_gauss_legendre(n));
  return *slot;
}

/// A rule in x on S(q): x_i = L cos(theta_i), w_i = L sin(theta_i) * (pi/2) * w_i^{GL}.
struct QuadratureRule {
  int n = 0;
  double q = 0.0;
  std::vector<double> x;
  std::vector<double> w;
  /// sqrt(4 - (1-q) x^2) = 2 sin(theta), accurate up to the endpoints.
  std::vector<double> root;
};

/// Calls f(x, root) when f accepts the edge factor, else f(x).
template <class F>
double call_at(F&& f, double x, double root) {
  if constexpr (std::is_invocable_v<F, double, double>) {
    return f(x, root);
  } else {
    return f(x);
  }
}

inline QuadratureRule make_rule(double q, int n) {
  const double radius = support_radius(q);
  const GaussLegendre& gl = gauss_legendre(n);
  QuadratureRule r;
  r.n = n;
  r.q = q;
  r.x.resize(static_cast<std::size_t>(n));
  r.w.resize(static_cast<std::size_t>(n));
  r.root.resize(static_cast<std::size_t>(n));
  const double half = std::numbers::pi / 2.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    const double theta = half * (gl.nodes[i] + 1.0);
    r.x[i] = radius * std::cos(theta);
    r.w[i] = radius * std::sin(theta) * half * gl.weights[i];
    r.root[i] = 2.0 * std::sin(theta);
  }
  return r;
}

struct QuadratureOptions {
  int initial_nodes = 128;
  int max_nodes = 1024;
  double tol = 1e-12;  ///< accepted |I_N - I_2N|
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  ///< |I_N - I_2N| for the accepted pair
  int nodes = 0;
};

/// Applies a rule to f; f takes x or (x, sqrt(4 - (1-q) x^2)).
template <class F>
double apply_rule(const QuadratureRule& r, F&& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * call_at(f, r.x[i], r.root[i]);
  return s;
}

/// Integral of f over S(q); doubles N until |I_N - I_2N| <= tol.
template <class F>
QuadratureResult integrate(F&& f, double q, const QuadratureOptions& opt = {}) {
  double prev = apply_rule(make_rule(q, opt.initial_nodes), f);
  for (int n = 2 * opt.initial_nodes; n <= opt.max_nodes; n *= 2) {
    const double cur = apply_rule(make_rule(q, n), f);
    const double diff = std::abs(cur - prev);
    if (diff <= opt.tol) return {cur, diff, n};
    prev = cur;
  }
  throw Nonconvergence("quadrature on S(q) did not reach tol = " + std::to_string(opt.tol) + " with " +
                       std::to_string(opt.max_nodes) + " nodes");
}

/// Integrates a vector-valued integrand; f(x, root, out) overwrites out.
/// Convergence is judged on the largest componentwise difference.
template <class F>
std::vector<double> integrate_vector(F&& f, std::size_t dim, double q, const QuadratureOptions& opt = {},
                                     double* error = nullptr) {
  const auto run = [&](int n) {
    const QuadratureRule r = make_rule(q, n);
    std::vector<double> acc(dim, 0.0);
    std::vector<double> v(dim, 0.0);
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      f(r.x[i], r.root[i], v);
      for (std::size_t j = 0; j < dim; ++j) acc[j] += r.w[i] * v[j];
    }
    return acc;
  };
  std::vector<double> prev = run(opt.initial_nodes);
  for (int n = 2 * opt.initial_nodes; n <= opt.max_nodes; n *= 2) {
    std::vector<double> cur = run(n);
    double diff = 0.0;
    for (std::size_t j = 0; j < dim; ++j) diff = std::max(diff, std::abs(cur[j] - prev[j]));
    if (diff <= opt.tol) {
      if (error != nullptr) *error = diff;
      return cur;
    }
    prev = std::move(cur);
  }
  throw Nonconvergence("vector quadrature on S(q) did not converge within " + std::to_string(opt.max_nodes) +
                       " nodes");
}

/// Integral of f over [a, b] by plain Gauss--Legendre, doubling N until
/// |I_N - I_2N| <= tol. Used for the Gaussian (q = 1) cases on a truncated line.
template <class F>
QuadratureResult integrate_interval(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  const auto run = [&](int n) {
    const GaussLegendre& gl = gauss_legendre(n);
    const double mid = (a + b) / 2.0;
    const double half = (b - a) / 2.0;
    double s = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) s += gl.weights[i] * f(mid + half * gl.nodes[i]);
    return half * s;
  };
  double prev = run(opt.initial_nodes);
  for (int n = 2 * opt.initial_nodes; n <= opt.max_nodes; n *= 2) {
    const double cur = run(n);
    const double diff = std::abs(cur - prev);
    if (diff <= opt.tol) return {cur, diff, n};
    prev = cur;
  }
  throw Nonconvergence("interval quadrature did not reach tol = " + std::to_string(opt.tol));
}

}  // namespace qortho
