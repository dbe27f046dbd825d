#pragma once

// Rejection sampling from fN and fCN with the semicircle fU(.|q) as proposal,
// plus a Kolmogorov-Smirnov statistic against a numerically integrated CDF.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <future>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "qortho/densities.hpp"
#include "qortho/error.hpp"
#include "qortho/expand.hpp"
#include "qortho/qcore.hpp"

namespace qortho {

/// Series bound on sup target/fU: sum (2k+1)|q|^{k(k+1)/2} for fN and
/// sum (k+1)|gamma_k| for fCN. Infinity when the series has not settled
/// within 500 terms.
inline double envelope_series_bound(const DensityId& d) {
  if (d.classical()) throw InvalidParameter("the semicircle envelope needs |q| < 1");
  if (d.tag == DensityTag::N) {
    const double aq = std::abs(d.q);
    double sum = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const double t = (2.0 * k + 1.0) * detail::qpow(aq, static_cast<long long>(k) * (k + 1) / 2);
      sum += t;
      if (t < 1e-17 * sum) return sum;
    }
    return std::numeric_limits<double>::infinity();
  }
  if (d.tag == DensityTag::CN) {
    constexpr int K = 500;
    const std::vector<double> g = detail::cn_over_u_coeffs(d.y, d.rho, d.q, K);
    double sum = 0.0, last = 0.0;
    for (int k = 0; k <= K; ++k) {
      const double t = (k + 1.0) * std::abs(g[static_cast<std::size_t>(k)]);
      sum += t;
      if (k > K - 10) last += t;
    }
    return last < 1e-12 * sum ? sum : std::numeric_limits<double>::infinity();
  }
  throw InvalidParameter(std::string("no semicircle envelope for ") + density_name(d.tag));
}

/// Largest target/fU over `points` equispaced interior points of S(q).
inline double envelope_grid_sup(const DensityId& d, int points = 10000) {
  const DensityId fu = DensityId::semicircle(d.q);
  const double L = support_radius(d.q);
  double sup = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = L * (-1.0 + 2.0 * (i + 0.5) / points);
    sup = std::max(sup, density_ratio(d, fu, x));
  }
  return sup;
}

/// M with target <= M fU on S(q): the series bound, raised to the grid
/// supremum if that is larger; grid supremum x 1.05 if the series diverges.
inline double envelope_constant(const DensityId& d) {
  if (d.tag != DensityTag::N && d.tag != DensityTag::CN) {
    throw InvalidParameter(std::string("no semicircle envelope for ") + density_name(d.tag));
  }
  if (d.classical()) throw InvalidParameter("the semicircle envelope needs |q| < 1");
  const double series = envelope_series_bound(d);
  const double grid = envelope_grid_sup(d);
  if (!std::isfinite(series)) return 1.05 * grid;
  return std::max(series, grid);
}

/// Throws EnvelopeViolation if target > M fU somewhere on a 10^4-point grid.
inline void check_envelope(const DensityId& d, double M, int points = 10000) {
  const double sup = envelope_grid_sup(d, points);
  if (sup > M * (1.0 + 1e-12)) {
    throw EnvelopeViolation("target/fU reaches " + std::to_string(sup) + " > M = " + std::to_string(M));
  }
}

struct SamplerConfig {
  DensityId density = DensityId::normal(0.0);
  double M = 0.0;  ///< envelope constant; 0 means envelope_constant(density)
  std::uint64_t seed = 1;
  std::size_t batch_size = 16384;
  bool parallel = false;
};

struct SampleResult {
  std::vector<double> samples;
  std::uint64_t proposals = 0;
  double M = 1.0;
  [[nodiscard]] double acceptance_rate() const {
    return proposals == 0 ? 0.0 : static_cast<double>(samples.size()) / static_cast<double>(proposals);
  }
};

/// theta in [0, pi] with (theta - sin(theta) cos(theta))/pi = u, by Newton
/// steps kept inside a shrinking bracket.
inline double semicircle_theta(double u) {
  double lo = 0.0, hi = std::numbers::pi;
  double t = std::numbers::pi * u;
  for (int it = 0; it < 60; ++it) {
    const double f = (t - std::sin(t) * std::cos(t)) / std::numbers::pi - u;
    if (f > 0) hi = t; else lo = t;
    const double fp = 2.0 * std::sin(t) * std::sin(t) / std::numbers::pi;
    double next = fp > 0.0 ? t - f / fp : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) < 1e-15) return next;
    t = next;
  }
  return t;
}

/// A draw from fU(.|q) given a uniform u in [0, 1).
inline double semicircle_draw(double u, double q) {
  return support_radius(q) * std::cos(std::numbers::pi - semicircle_theta(u));
}

namespace detail {

inline void sample_batch(const DensityId& d, double M, std::uint64_t seed, std::uint64_t batch, std::size_t count,
                         std::vector<double>& out, std::uint64_t& proposals) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(batch), static_cast<std::uint32_t>(batch >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const DensityId fu = DensityId::semicircle(d.q);
  out.clear();
  out.reserve(count);
  proposals = 0;
  while (out.size() < count) {
    const double x = semicircle_draw(unif(rng), d.q);
    const double ratio = density_ratio(d, fu, x);
    ++proposals;
    if (ratio > M * (1.0 + 1e-12)) {
      throw EnvelopeViolation("target/fU = " + std::to_string(ratio) + " exceeds M = " + std::to_string(M) +
                              " at x = " + std::to_string(x));
    }
    if (unif(rng) * M < ratio) out.push_back(x);
  }
}

}  // namespace detail

/// n draws from cfg.density (fN or fCN). Batch b of size cfg.batch_size uses
/// mt19937_64 seeded with seed_seq{seed, b}; batches are concatenated in
/// order, so the output depends only on (seed, batch_size, n).
inline SampleResult sample(const SamplerConfig& cfg, std::size_t n) {
  const DensityId& d = cfg.density;
  if (d.tag != DensityTag::N && d.tag != DensityTag::CN) {
    throw InvalidParameter(std::string("sampling is implemented for fN and fCN, not ") + density_name(d.tag));
  }
  if (cfg.batch_size == 0) throw InvalidParameter("batch size must be positive");
  SampleResult res;
  res.M = cfg.M > 0.0 ? cfg.M : envelope_constant(d);
  check_envelope(d, res.M);
  const std::size_t batches = (n + cfg.batch_size - 1) / cfg.batch_size;
  std::vector<std::vector<double>> parts(batches);
  std::vector<std::uint64_t> props(batches, 0);
  const auto run = [&](std::size_t b) {
    const std::size_t count = std::min(cfg.batch_size, n - b * cfg.batch_size);
    detail::sample_batch(d, res.M, cfg.seed, b, count, parts[b], props[b]);
  };
  if (cfg.parallel && batches > 1) {
    std::vector<std::future<void>> jobs;
    for (std::size_t b = 0; b < batches; ++b) jobs.push_back(std::async(std::launch::async, run, b));
    for (auto& j : jobs) j.get();
  } else {
    for (std::size_t b = 0; b < batches; ++b) run(b);
  }
  res.samples.reserve(n);
  for (std::size_t b = 0; b < batches; ++b) {
    res.samples.insert(res.samples.end(), parts[b].begin(), parts[b].end());
    res.proposals += props[b];
  }
  return res;
}

/// CDF of a density on S(q) tabulated on a 512-panel theta grid, with cubic
/// Hermite interpolation in theta between nodes.
class NumericCdf {
 public:
  explicit NumericCdf(const DensityId& d, int panels = 512) : q_(d.q), L_(support_radius(d.q)), panels_(panels) {
    if (d.classical()) throw InvalidParameter("numeric CDF needs |q| < 1");
    // phi = pi - theta runs from 0 (x = -L) to pi (x = L); dF/dphi = f(x) L sin(phi)
    const double h = std::numbers::pi / panels;
    const GaussLegendre& gl = gauss_legendre(8);
    cdf_.assign(static_cast<std::size_t>(panels) + 1, 0.0);
    dcdf_.assign(static_cast<std::size_t>(panels) + 1, 0.0);
    const auto g = [&](double phi) {
      const double x = -L_ * std::cos(phi);
      return density_eval(d, x, 2.0 * std::sin(phi)) * L_ * std::sin(phi);
    };
    for (int i = 0; i < panels; ++i) {
      const double a = i * h;
      double s = 0.0;
      for (std::size_t j = 0; j < gl.nodes.size(); ++j) s += gl.weights[j] * g(a + h * (gl.nodes[j] + 1.0) / 2.0);
      cdf_[static_cast<std::size_t>(i) + 1] = cdf_[static_cast<std::size_t>(i)] + s * h / 2.0;
      dcdf_[static_cast<std::size_t>(i)] = g(a);
    }
    dcdf_.back() = 0.0;
    total_ = cdf_.back();
  }

  /// Total mass of the tabulated density (1 up to quadrature error).
  [[nodiscard]] double total() const { return total_; }

  [[nodiscard]] double operator()(double x) const {
    if (x <= -L_) return 0.0;
    if (x >= L_) return 1.0;
    const double phi = std::acos(std::clamp(-x / L_, -1.0, 1.0));
    const double h = std::numbers::pi / panels_;
    const int i = std::min(panels_ - 1, static_cast<int>(phi / h));
    const double t = (phi - i * h) / h;
    const auto ui = static_cast<std::size_t>(i);
    const double t2 = t * t, t3 = t2 * t;
    const double v = (2 * t3 - 3 * t2 + 1) * cdf_[ui] + (t3 - 2 * t2 + t) * h * dcdf_[ui] +
                     (-2 * t3 + 3 * t2) * cdf_[ui + 1] + (t3 - t2) * h * dcdf_[ui + 1];
    return v / total_;
  }

 private:
  double q_;
  double L_;
  int panels_;
  double total_ = 1.0;
  std::vector<double> cdf_;
  std::vector<double> dcdf_;
};

/// sup |F_n - F| for the samples against density d; NaN for an empty sample.
inline double ks_statistic(std::vector<double> samples, const DensityId& d) {
  if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
  const NumericCdf F(d);
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double D = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = F(samples[i]);
    D = std::max({D, (i + 1.0) / n - f, f - i / n});
  }
  return D;
}

/// Two-sample Kolmogorov-Smirnov distance; NaN if either sample is empty.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    D = std::max(D, std::abs(i / na - j / nb));
  }
  return D;
}

/// One value per line with round-trip precision.
inline void write_samples_text(std::ostream& os, const std::vector<double>& v) {
  char buf[32];
  for (double x : v) {
    std::snprintf(buf, sizeof buf, "%.17g\n", x);
    os << buf;
  }
}

/// Raw little-endian IEEE-754 binary64.
inline void write_samples_binary(std::ostream& os, const std::vector<double>& v) {
  for (double x : v) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    if constexpr (std::endian::native == std::endian::big) {
      std::uint64_t r = 0;
      for (int i = 0; i < 8; ++i) r |= ((bits >> (8 * i)) & 0xffu) << (8 * (7 - i));
      bits = r;
    }
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
    os.write(bytes, 8);
  }
}

}  // namespace qortho
