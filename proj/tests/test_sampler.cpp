#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "qortho/sampler.hpp"
#include "support.hpp"

using namespace qortho;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

bool ks_accepts(const DensityId& d, std::size_t n, std::uint64_t seed) {
  // 5% critical value; one retry with a fresh seed keeps the false alarm rate at 0.25%
  const double crit = 1.36 / std::sqrt(static_cast<double>(n));
  for (std::uint64_t s : {seed, seed + 1000}) {
    SamplerConfig c;
    c.density = d;
    c.seed = s;
    if (ks_statistic(sample(c, n).samples, d) < crit) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("envelope constants", "[sampler]") {
  CHECK(envelope_constant(DensityId::normal(0.0)) == 1.0);
  CHECK_THAT(envelope_constant(DensityId::normal(0.5)), WithinAbs(3.2435, 1e-4));
  CHECK(envelope_constant(DensityId::normal(-0.5)) == envelope_constant(DensityId::normal(0.5)));
  for (double q : {1e-3, 1e-4}) CHECK_THAT(envelope_constant(DensityId::normal(q)), WithinRel(1 + 3 * q, 1e-2));
  CHECK_THROWS_AS(envelope_constant(DensityId::normal(1.0)), InvalidParameter);
  CHECK_THROWS_AS(envelope_constant(DensityId::rogers(0.3, 0.5)), InvalidParameter);
}

TEST_CASE("envelope dominates the target on the grid", "[sampler][property]") {
  for (double q : {-0.5, 0.3, 0.5, 0.7, 0.9}) {
    const auto d = DensityId::normal(q);
    const double M = envelope_constant(d);
    CHECK_NOTHROW(check_envelope(d, M));
    CHECK(envelope_grid_sup(d) <= M);
  }
  qtest::Draw draw(77);
  for (int t = 0; t < 10; ++t) {
    const double q = draw.real(-0.6, 0.8);
    const double L = support_radius(q);
    const auto d = DensityId::conditional(draw.real(-0.9 * L, 0.9 * L), draw.real(-0.8, 0.8), q);
    INFO("q=" << q << " y=" << d.y << " rho=" << d.rho);
    const double M = envelope_constant(d);
    CHECK_NOTHROW(check_envelope(d, M));
  }
  CHECK_THROWS_AS(check_envelope(DensityId::normal(0.5), 1.0), EnvelopeViolation);
}

TEST_CASE("semicircle proposal inverts its CDF", "[sampler]") {
  for (double u : {0.0, 1e-9, 0.1, 0.5, 0.77, 1.0 - 1e-12}) {
    const double t = semicircle_theta(u);
    CHECK_THAT((t - std::sin(t) * std::cos(t)) / std::numbers::pi, WithinAbs(u, 1e-14));
  }
  CHECK_THAT(semicircle_draw(0.5, 0.3), WithinAbs(0.0, 1e-14));
  CHECK(std::abs(semicircle_draw(0.999999, 0.3)) <= support_radius(0.3));
}

TEST_CASE("sampling is deterministic in seed and batch size", "[sampler]") {
  SamplerConfig c;
  c.density = DensityId::normal(0.5);
  c.seed = 42;
  c.batch_size = 1000;
  const auto a = sample(c, 3500);
  const auto b = sample(c, 3500);
  c.parallel = true;
  const auto p = sample(c, 3500);
  REQUIRE(a.samples.size() == 3500);
  CHECK(a.samples == b.samples);
  CHECK(a.samples == p.samples);
  CHECK(a.proposals == p.proposals);
  c.seed = 43;
  CHECK(sample(c, 3500).samples != a.samples);
  CHECK(sample(c, 0).samples.empty());
}

TEST_CASE("acceptance rate", "[sampler]") {
  SamplerConfig c;
  c.density = DensityId::normal(0.0);
  const auto exact = sample(c, 5000);
  CHECK(exact.acceptance_rate() == 1.0);
  for (double q : {0.3, 0.7}) {
    c.density = DensityId::normal(q);
    const auto r = sample(c, 20000);
    const double p = 1.0 / r.M;
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(r.proposals));
    CHECK(std::abs(r.acceptance_rate() - p) < 4 * sigma);
  }
}

TEST_CASE("samples follow the target law", "[sampler][statistical]") {
  for (double q : {-0.5, 0.0, 0.5, 0.9}) {
    INFO("q=" << q);
    CHECK(ks_accepts(DensityId::normal(q), 20000, 11));
  }
  CHECK(ks_accepts(DensityId::conditional(0.5, 0.4, 0.3), 20000, 12));
  CHECK(ks_accepts(DensityId::conditional(-1.0, -0.6, 0.7), 20000, 13));
}

TEST_CASE("KS detects the wrong law", "[sampler][statistical]") {
  SamplerConfig c;
  c.density = DensityId::normal(0.7);
  const auto s = sample(c, 20000);
  CHECK(ks_statistic(s.samples, DensityId::semicircle(0.7)) > 1.36 / std::sqrt(20000.0));
  CHECK(std::isnan(ks_statistic({}, DensityId::normal(0.5))));
  CHECK(std::isnan(ks_two_sample({}, {1.0})));
}

TEST_CASE("numeric CDF", "[sampler]") {
  const NumericCdf F(DensityId::normal(0.5));
  CHECK_THAT(F.total(), WithinAbs(1.0, 1e-12));
  CHECK_THAT(F(0.0), WithinAbs(0.5, 1e-12));
  CHECK(F(-10.0) == 0.0);
  CHECK(F(10.0) == 1.0);
  const NumericCdf U(DensityId::semicircle(0.0));
  for (double x : {-1.5, -0.3, 0.8}) {
    const double t = std::numbers::pi - std::acos(x / 2);
    CHECK_THAT(U(x), WithinAbs((t - std::sin(t) * std::cos(t)) / std::numbers::pi, 1e-10));
  }
}

TEST_CASE("conditional law at rho = 0 is the marginal", "[sampler][statistical]") {
  SamplerConfig a;
  a.density = DensityId::normal(0.4);
  a.seed = 5;
  SamplerConfig b;
  b.density = DensityId::conditional(0.7, 0.0, 0.4);
  b.seed = 6;
  const double n = 20000;
  const double D = ks_two_sample(sample(a, 20000).samples, sample(b, 20000).samples);
  CHECK(D < 1.63 * std::sqrt(2.0 / n));
}

TEST_CASE("sample output formats", "[sampler]") {
  const std::vector<double> v{0.1, -2.5, 1.0 / 3.0};
  std::ostringstream text;
  write_samples_text(text, v);
  std::istringstream in(text.str());
  for (double x : v) {
    double y;
    in >> y;
    CHECK(y == x);
  }
  std::ostringstream bin;
  write_samples_binary(bin, v);
  const std::string s = bin.str();
  REQUIRE(s.size() == 24);
  // 0.1 = 0x3FB999999999999A, least significant byte first
  CHECK(static_cast<unsigned char>(s[0]) == 0x9A);
  CHECK(static_cast<unsigned char>(s[7]) == 0x3F);
  double back;
  std::memcpy(&back, s.data() + 8, 8);
  CHECK(back == -2.5);
}
