#include <catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include "qortho/expand.hpp"
#include "support.hpp"

using namespace qortho;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ExpansionParams<Rational> random_params(qtest::Draw& draw) {
  ExpansionParams<Rational> p;
  p.q = draw.rational(-1, 1);
  p.y = draw.rational(-1, 1);  // inside S(q) for every |q| < 1
  p.rho = draw.rational(-1, 1);
  p.beta = draw.rational(-1, 1);
  return p;
}

ExpansionParams<double> params(double q, double y, double rho, double beta = 0.0) {
  ExpansionParams<double> p;
  p.q = q;
  p.y = y;
  p.rho = rho;
  p.beta = beta;
  return p;
}

double max_error_vs_target(ExpansionId id, const ExpansionParams<double>& p, int points) {
  const ExpansionSeries series(id, p);
  const double L = id == ExpansionId::MehlerClassical ? 5.0 : support(effective_q(id, p)).hi;
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = -L + 2.0 * L * (i + 0.5) / points;
    const double got = expansion_eval(series, x).value;
    worst = std::max(worst, std::abs(got - density_eval(expansion_target(id, p), x)));
  }
  return worst;
}

}  // namespace

TEST_CASE("expansion names round-trip", "[expand]") {
  for (ExpansionId id : kAllExpansions) CHECK(parse_expansion(expansion_name(id)) == id);
  CHECK_THROWS_AS(parse_expansion("CN_over_Q"), InvalidParameter);
}

TEST_CASE("printed coefficients at documented points", "[expand]") {
  for (double q : {-0.5, 0.0, 0.3, 0.7}) {
    const auto p = params(q, 0.8, 0.45, 0.35);
    CHECK_THAT(expansion_coeff(ExpansionId::NOverU, 2, p), WithinAbs(-q, 1e-15));
    CHECK(expansion_coeff(ExpansionId::NOverU, 3, p) == 0.0);
    CHECK_THAT(expansion_coeff(ExpansionId::CNOverU, 1, p), WithinRel(std::sqrt(1.0 - q) * 0.45 * 0.8, 1e-14));
    for (int n = 0; n <= 8; ++n) {
      CHECK_THAT(expansion_coeff(ExpansionId::CNOverN, n, p),
                 WithinRel(std::pow(0.45, n) / q_factorial<double>(n, q), 1e-14));
    }
    for (ExpansionId id : kAllExpansions) {
      INFO(expansion_name(id));
      CHECK_THAT(expansion_coeff(id, 0, p), WithinAbs(1.0, 1e-15));
    }
    for (ExpansionId id : {ExpansionId::NOverU, ExpansionId::UOverN, ExpansionId::ROverN, ExpansionId::NOverR}) {
      for (int n = 1; n <= 9; n += 2) CHECK(expansion_coeff(id, n, p) == 0.0);
    }
  }
}

TEST_CASE("coefficients times norms reproduce the connection column exactly", "[expand][exact]") {
  qtest::Draw draw(101);
  const int n_max = 7;
  for (ExpansionId id : kAllExpansions) {
    for (int trial = 0; trial < 6; ++trial) {
      const ExpansionParams<Rational> p = random_params(draw);
      INFO(expansion_name(id) << " q=" << p.q << " y=" << p.y << " rho=" << p.rho << " beta=" << p.beta);
      const std::vector<Rational> c = basis_coefficients(id, p, n_max);
      const Family<Rational> fam = expansion_family(id, p);
      const PairParams<Rational> a = expansion_pair_params(id, p);
      CHECK(c[0] == Rational(1));
      for (int n = 0; n <= n_max; ++n) {
        const std::vector<Rational> row = connect_closed_form(expansion_pair(id), a, n);
        CHECK(c[static_cast<std::size_t>(n)] * squared_norm(fam, n) == row[0]);
      }
    }
  }
}

TEST_CASE("coefficients agree with the oracle connection", "[expand][exact]") {
  qtest::Draw draw(7);
  for (ExpansionId id : {ExpansionId::CNOverU, ExpansionId::CNOverK, ExpansionId::NOverCN, ExpansionId::NOverR}) {
    const ExpansionParams<Rational> p = random_params(draw);
    INFO(expansion_name(id));
    const auto oracle = oracle_connection(expansion_pair(id), expansion_pair_params(id, p), 6);
    const std::vector<Rational> c = basis_coefficients(id, p, 6);
    const Family<Rational> fam = expansion_family(id, p);
    for (int n = 0; n <= 6; ++n) CHECK(c[static_cast<std::size_t>(n)] * squared_norm(fam, n) == oracle.entry(n, 0));
  }
}

TEST_CASE("squared norms match the recurrence", "[expand][exact]") {
  // <x p_{n-1}, p_n> read off both recurrences: ||p_n||^2 / ||p_{n-1}||^2 = c_n a_{n-1} / a_n
  qtest::Draw draw(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Rational q = draw.rational(-1, 1);
    const Rational y = draw.rational(-1, 1);
    const Rational rho = draw.rational(-1, 1);
    const Rational beta = draw.rational(-1, 1);
    for (const Family<Rational>& f :
         {Family<Rational>::qhermite(q), Family<Rational>::asc(y, rho, q), Family<Rational>::rogers(beta, q),
          Family<Rational>::cheb_u_hat(q), Family<Rational>::cheb_t_hat(q), Family<Rational>::kesten_hat(y, rho, q),
          Family<Rational>::kesten(y, rho), Family<Rational>::classical_hermite()}) {
      for (int n = 1; n <= 8; ++n) {
        const Step<Rational> now = recurrence_step(f, n - 1);
        const Step<Rational> next = recurrence_step(f, n);
        const Rational lhs = squared_norm(f, n) / squared_norm(f, n - 1);
        const Rational rhs = next.c * now.a / next.a;
        INFO(family_name(f.tag) << " n=" << n);
        CHECK(lhs == rhs);
      }
    }
  }
}

TEST_CASE("expansions reproduce their target densities", "[expand]") {
  CHECK(max_error_vs_target(ExpansionId::CNOverN, params(0.3, 0.0, 0.5), 21) < 1e-8);
  for (double y : {-1.2, 0.4, 2.0}) CHECK(max_error_vs_target(ExpansionId::CNOverN, params(0.3, y, 0.5), 21) < 1e-8);
  for (ExpansionId id : kAllExpansions) {
    for (double q : {-0.5, 0.2, 0.7}) {
      INFO(expansion_name(id) << " q=" << q);
      CHECK(max_error_vs_target(id, params(q, 0.5, -0.4, 0.3), 11) < 1e-10);
      CHECK(max_error_vs_target(id, params(q, -1.1, 0.7, -0.6), 11) < 1e-10);
    }
  }
}

TEST_CASE("trivial expansions", "[expand]") {
  for (double x : {-1.5, 0.0, 0.7, 1.99}) {
    const auto p = params(0.0, 0.0, 0.0);
    for (int k : {0, 3, 10}) {
      ExpansionOptions opt;
      opt.k = k;
      CHECK_THAT(expansion_eval(ExpansionSpec{ExpansionId::NOverU, p, opt}, x).value,
                 WithinAbs(density_eval(DensityId::normal(0.0), x), 1e-15));
    }
  }
  const auto p = params(0.6, 0.9, 0.0);
  for (double x : {-2.0, -0.3, 1.1}) {
    for (int k : {0, 5, 30}) {
      ExpansionOptions opt;
      opt.k = k;
      CHECK_THAT(expansion_eval(ExpansionSpec{ExpansionId::CNOverN, p, opt}, x).value,
                 WithinAbs(density_eval(DensityId::normal(0.6), x), 1e-14));
    }
  }
}

TEST_CASE("Poisson-Mehler partial sums are symmetric and nonnegative", "[expand][property]") {
  qtest::Draw draw(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const double q = draw.real(-0.9, 0.9);
    const double rho = draw.real(-0.8, 0.8);
    const double L = support(q).hi;
    const double x = draw.real(-L, L);
    const double y = draw.real(-L, L);
    const int K = draw.integer(0, 40);
    ExpansionOptions opt;
    opt.k = K;
    const ExpansionSeries at_y(ExpansionId::CNOverN, params(q, y, rho), 60);
    const ExpansionSeries at_x(ExpansionId::CNOverN, params(q, x, rho), 60);
    const double a = at_y.evaluate(x, opt).series;
    const double b = at_x.evaluate(y, opt).series;
    INFO("q=" << q << " rho=" << rho << " x=" << x << " y=" << y << " K=" << K);
    CHECK_THAT(a, WithinAbs(b, 1e-12 * std::max(1.0, std::abs(a))));
    CHECK(ExpansionSeries(ExpansionId::CNOverN, params(q, y, rho)).evaluate(x).series >= -1e-10);
  }
}

TEST_CASE("truncation controls", "[expand]") {
  SECTION("tail estimate under tolerance") {
    const ExpansionSeries s(ExpansionId::CNOverN, params(0.7, 0.2, 0.6));
    ExpansionOptions opt;
    opt.tol = 1e-9;
    const ExpansionValue v = s.evaluate(0.4, opt);
    CHECK(v.tail_bound <= 1e-9);
    CHECK(v.terms < 500);
    opt.tol = 1e-13;
    CHECK(s.evaluate(0.4, opt).terms >= v.terms);
  }
  SECTION("slow series report instead of truncating silently") {
    CHECK_THROWS_AS(ExpansionSeries(ExpansionId::UOverN, params(0.9, 0, 0)).evaluate(0.1), TruncationUnreliable);
    ExpansionOptions opt;
    opt.k_max = 30;
    CHECK_THROWS_AS(expansion_eval(ExpansionSpec{ExpansionId::CNOverN, params(0.8, 0.5, 0.9), opt}, 0.0),
                    TruncationUnreliable);
  }
  SECTION("parameter checks") {
    CHECK_THROWS_AS(ExpansionSeries(ExpansionId::CNOverN, params(0.3, 0.0, 1.0)), InvalidParameter);
    CHECK_THROWS_AS(ExpansionSeries(ExpansionId::CNOverN, params(1.0, 0.0, 0.5)), InvalidParameter);
    CHECK_THROWS_AS(ExpansionSeries(ExpansionId::ROverN, params(0.3, 0.0, 0.0, -1.0)), InvalidParameter);
    CHECK_THROWS_AS(ExpansionSeries(ExpansionId::CNOverU, params(0.3, 3.0, 0.5)), SupportViolation);
    CHECK_THROWS_AS(expansion_coeff(ExpansionId::NOverU, -1, params(0.3, 0, 0)), InvalidParameter);
  }
}

TEST_CASE("reciprocal Mehler series", "[expand]") {
  CHECK_THROWS_AS(mehler_reciprocal(0.0, 0.0, std::sqrt(0.5)), InvalidParameter);
  CHECK_THROWS_AS(mehler_reciprocal(0.0, 0.0, -0.8), InvalidParameter);
  for (double rho : {-0.6, 0.3, 0.5}) {
    for (double x : {-2.0, 0.0, 1.3}) {
      for (double y : {-1.0, 0.5}) {
        const ExpansionValue v = mehler_reciprocal(x, y, rho);
        INFO("rho=" << rho << " x=" << x << " y=" << y);
        CHECK_THAT(v.value, WithinAbs(density_eval(DensityId::normal(1.0), x), 1e-10));
      }
    }
  }
}

TEST_CASE("identity suite", "[expand][identities]") {
  const std::vector<VerificationReport> reports = identity_suite();
  CHECK(reports.size() > 50);
  for (const auto& r : reports) {
    INFO(r.check_id << ' ' << r.params.dump() << " residual " << r.residual);
    CHECK(r.pass);
  }
  IdentityConfig cfg;
  cfg.q_grid = {0.5};
  cfg.rho_grid = {};
  cfg.reciprocal_settings = {};
  for (const auto& r : identity_suite(cfg)) {
    if (r.check_id == "identity/i2") CHECK_THAT(r.params["rhs"].get<double>(), WithinAbs(1.6416325606551539, 1e-14));
  }
  cfg.q_grid = {0.0};
  for (const auto& r : identity_suite(cfg)) {
    if (r.check_id == "identity/i3") CHECK(r.params["lhs"].get<double>() == r.params["rhs"].get<double>());
  }
  cfg.tol = 0.0;
  for (const auto& r : identity_suite(cfg)) CHECK_FALSE(r.pass);
}
