#include <catch_amalgamated.hpp>

#include <cmath>

#include "qortho/connect.hpp"
#include "support.hpp"

using namespace qortho;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using F = Family<Rational>;

namespace {

PairParams<Rational> random_params(qtest::Draw& draw) {
  PairParams<Rational> a;
  a.q = draw.rational(-1, 1);
  a.y = draw.rational(-2, 2);
  a.rho = draw.rational(-1, 1);
  a.beta = draw.rational(-1, 1);
  a.gamma = draw.rational(-1, 1);
  return a;
}

// Semicircle on (-1, 1): m_{2k} = Catalan(k) / 4^k.
Rational semicircle_moment(int j) {
  if (j % 2 != 0) return Rational(0);
  const int k = j / 2;
  Rational c(1);
  for (int i = 0; i < k; ++i) c = c * Rational(2 * (2 * i + 1), i + 2);
  return c / ipow(Rational(4), k);
}

Rational semicircle_integral(const RationalPoly& p) {
  Rational s(0);
  for (int j = 0; j <= p.degree(); ++j) s += p[j] * semicircle_moment(j);
  return s;
}

}  // namespace

TEST_CASE("T_2 = (U_2 - U_0)/2") {
  const auto row = connect_closed_form(ConnectionPair::TFromU, PairParams<Rational>{}, 2);
  CHECK(row == std::vector<Rational>{Rational(-1, 2), 0, Rational(1, 2)});
}

TEST_CASE("leading and low-order closed-form entries") {
  PairParams<Rational> a;
  a.q = Rational(1, 3);
  a.y = Rational(3, 2);
  a.rho = Rational(-2, 5);
  // P_1 = rho B_1(y) H_0 + H_1
  CHECK(connect_closed_form(ConnectionPair::AscFromHermite, a, 1) == std::vector<Rational>{-a.rho * a.y, 1});
  // hat normalization: D-hat_{n,n} = 1, C-hat_{0,1} = 0, C-hat_{1,1} = 1
  for (int n = 0; n <= 8; ++n) CHECK(connect_closed_form(ConnectionPair::UFromAsc, a, n).back() == 1);
  CHECK(connect_closed_form(ConnectionPair::KestenFromAsc, a, 1) == std::vector<Rational>{0, 1});
  CHECK(connect_closed_form(ConnectionPair::KestenFromAsc, a, 0) == std::vector<Rational>{1});
  // printed normalization: D_{n,n} = (1-q)^{n/2}, C_{1,1} = (1-q)^{1/2}
  CHECK_THAT(printed_scale(ConnectionPair::UFromAsc, 0.36, 4, 4), WithinRel(std::pow(0.64, 2), 1e-15));
  CHECK_THAT(printed_scale(ConnectionPair::KestenFromAsc, 0.36, 1, 1), WithinRel(0.8, 1e-15));
  CHECK_THAT(printed_scale(ConnectionPair::HermiteFromU, 0.36, 4, 2), WithinRel(1 / 0.64, 1e-15));
}

TEST_CASE("every closed form equals the oracle, n <= 12") {
  qtest::Draw draw(31);
  for (int trial = 0; trial < 4; ++trial) {
    const PairParams<Rational> a = random_params(draw);
    for (ConnectionPair p : kAllPairs) {
      INFO(pair_name(p));
      const ConnectionMatrix<Rational> oracle = oracle_connection(p, a, 12);
      for (int n = 0; n <= 12; ++n) {
        INFO("n = " << n);
        CHECK(connect_closed_form(p, a, n) == oracle.rows[static_cast<std::size_t>(n)]);
        CHECK(reconstruct(oracle, n) == coeffs(oracle.source, n));
      }
    }
  }
}

TEST_CASE("closed forms at boundary parameters") {
  PairParams<Rational> a;
  a.y = Rational(1, 2);
  a.rho = Rational(1, 3);
  a.beta = Rational(0);
  a.gamma = Rational(2, 3);
  for (const Rational& q : {Rational(0), Rational(-1), Rational(1, 2)}) {
    a.q = q;
    for (ConnectionPair p : {ConnectionPair::AscFromHermite, ConnectionPair::HermiteFromAsc,
                             ConnectionPair::RogersFromRogers, ConnectionPair::RogersFromHermite,
                             ConnectionPair::HermiteFromRogers, ConnectionPair::UFromHermite,
                             ConnectionPair::HermiteFromU, ConnectionPair::UFromAsc, ConnectionPair::KestenFromAsc}) {
      INFO(pair_name(p) << " q = " << q);
      const bool rogers = p == ConnectionPair::RogersFromRogers || p == ConnectionPair::RogersFromHermite ||
                          p == ConnectionPair::HermiteFromRogers;
      if (rogers && q == -1) {
        CHECK_THROWS_AS(connect_closed_form(p, a, 3), InvalidParameter);
        continue;
      }
      const ConnectionMatrix<Rational> oracle = oracle_connection(p, a, 10);
      for (int n = 0; n <= 10; ++n) CHECK(connect_closed_form(p, a, n) == oracle.rows[static_cast<std::size_t>(n)]);
    }
  }
}

TEST_CASE("oracle: trivial pairs give identity matrices") {
  const Rational q(2, 5);
  const auto m1 = oracle_connection(F::qhermite(Rational(0)), F::cheb_u_hat(Rational(0)), 10);
  const auto m2 = oracle_connection(F::rogers(Rational(0), q), F::qhermite(q), 10);
  for (int n = 0; n <= 10; ++n) {
    for (int k = 0; k <= n; ++k) {
      CHECK(m1.entry(n, k) == (n == k ? 1 : 0));
      CHECK(m2.entry(n, k) == (n == k ? 1 : 0));
    }
  }
  CHECK_THROWS_AS(oracle_connection(F::qhermite(q), F::big_b(Rational(0)), 4), InvalidPair);
}

TEST_CASE("round trips compose to the identity") {
  qtest::Draw draw(32);
  for (int trial = 0; trial < 3; ++trial) {
    const PairParams<Rational> a = random_params(draw);
    const int N = 12;
    for (auto [forward, backward] : {std::pair{ConnectionPair::UFromHermite, ConnectionPair::HermiteFromU},
                                     std::pair{ConnectionPair::HermiteFromAsc, ConnectionPair::AscFromHermite},
                                     std::pair{ConnectionPair::TFromU, ConnectionPair::UFromT}}) {
      const auto f = closed_form_matrix(forward, a, N);
      const auto b = closed_form_matrix(backward, a, N);
      for (int n = 0; n <= N; ++n) {
        for (int k = 0; k <= n; ++k) {
          Rational s(0);
          for (int j = k; j <= n; ++j) s += f.entry(n, j) * b.entry(j, k);
          CHECK(s == (n == k ? 1 : 0));
        }
      }
    }
  }
}

TEST_CASE("sum_j [n j] B_{n-j}(x) H_j(x) = 0 as a polynomial identity") {
  qtest::Draw draw(33);
  for (int trial = 0; trial < 4; ++trial) {
    const Rational q = draw.rational(-1, 1);
    const auto b = coeffs_all(F::big_b(q), 20);
    const auto h = coeffs_all(F::qhermite(q), 20);
    for (int n = 1; n <= 20; ++n) {
      RationalPoly s;
      for (int j = 0; j <= n; ++j) s += b[static_cast<std::size_t>(n - j)] * h[static_cast<std::size_t>(j)] * q_binomial<Rational>(n, j, q);
      CHECK(s.is_zero());
    }
  }
}

TEST_CASE("P_n(0|y,rho,q) through B_n and odd double factorials") {
  qtest::Draw draw(34);
  for (int trial = 0; trial < 4; ++trial) {
    const PairParams<Rational> a = random_params(draw);
    const auto b = eval_all(F::big_b(a.q), 20, a.y);
    for (int n = 0; n <= 20; ++n) {
      Rational s(0);
      for (int j = 0; 2 * j <= n; ++j) {
        s += q_binomial<Rational>(n, 2 * j, a.q) * sign_pow<Rational>(j) * ipow(a.rho, n - 2 * j) *
             b[static_cast<std::size_t>(n - 2 * j)] * q_double_factorial_odd<Rational>(j, a.q);
      }
      CHECK(s == eval<Rational, Rational>(F::asc(a.y, a.rho, a.q), n, Rational(0)));
    }
  }
}

TEST_CASE("1 - q^{n(n+1)/2} as a finite q-sum, n <= 15") {
  qtest::Draw draw(35);
  for (int trial = 0; trial < 4; ++trial) {
    const Rational q = draw.rational(-1, 1);
    for (int n = 1; n <= 15; ++n) {
      Rational s(0);
      for (int j = 0; j < n; ++j) {
        s += ipow(Rational(1 - q), n - j) * ipow(q, j * (j + 1) / 2) * q_binomial<Rational>(2 * n - j, j, q) *
             q_double_factorial_odd<Rational>(n - j, q);
      }
      CHECK(s == 1 - ipow(q, n * (n + 1) / 2));
    }
  }
}

TEST_CASE("ratio connection: arcsine against the semicircle") {
  // monic Chebyshev T on (-1, 1): a_0 = 1, a_n = T_n / 2^{n-1}
  const std::vector<Rational> w{1, 0, Rational(-1, 4)};
  const RatioConnection rc = ratio_connection(w, F::cheb_t(), 10);
  CHECK(rc.f[0] == 1);
  CHECK(rc.f[1] == 0);
  CHECK(rc.f[2] == Rational(1, 4));
  CHECK(rc.f[3] == 0);
  CHECK(rc.f[4] == Rational(1, 16));
  CHECK(rc.phi[4] == RationalPoly{Rational(1, 16), 0, Rational(-3, 4), 0, 1});
  CHECK(rc.phi[4] == coeffs(F::cheb_u(), 4) * Rational(1, 16));
  std::vector<RationalPoly> a = coeffs_all(F::cheb_t(), 10);
  for (auto& p : a) p = p.monic();
  for (int n = 1; n <= 10; ++n) CHECK(semicircle_integral(rc.phi[static_cast<std::size_t>(n)]) == 0);
  for (int n = 0; n <= 10; ++n) {
    RationalPoly s;
    for (int i = 0; i <= std::min(n, 2); ++i) s += rc.phi[static_cast<std::size_t>(n - i)] * w[static_cast<std::size_t>(i)];
    CHECK(s == a[static_cast<std::size_t>(n)]);
  }
}

TEST_CASE("ratio connection: identical measures and bad w_0") {
  const RatioConnection rc = ratio_connection({Rational(1)}, F::qhermite(Rational(1, 2)), 6);
  for (int n = 1; n <= 6; ++n) CHECK(rc.f[static_cast<std::size_t>(n)] == 0);
  for (int n = 0; n <= 6; ++n) CHECK(rc.phi[static_cast<std::size_t>(n)] == coeffs(F::qhermite(Rational(1, 2)), n));
  CHECK_THROWS_AS(ratio_connection({Rational(2)}, F::cheb_t(), 3), NonunitW0);
  CHECK_THROWS_AS(ratio_connection({}, F::cheb_t(), 3), NonunitW0);
}

TEST_CASE("band structure") {
  CHECK(band_structure(F::cheb_t(), F::cheb_u(), 10, 2) == 2);
  CHECK(band_structure(F::qhermite(Rational(1, 3)), F::qhermite(Rational(1, 3)), 10) == 0);
  CHECK(band_structure(F::kesten(Rational(1, 2), Rational(1, 3)), F::cheb_u_hat(Rational(0)), 10, 2) == 2);
  CHECK_THROWS_AS(band_structure(F::cheb_t(), F::cheb_u(), 10, 1), BandViolation);
}

TEST_CASE("connection CSV lists nonzero entries with numerator and denominator") {
  const auto m = closed_form_matrix(ConnectionPair::TFromU, PairParams<Rational>{}, 2);
  CHECK(to_csv(m) == "n,k,numerator,denominator\n0,0,1,1\n1,1,1,2\n2,2,1,2\n2,0,-1,2\n");
  CHECK(parse_pair("kesten-from-asc") == ConnectionPair::KestenFromAsc);
  CHECK_THROWS_AS(parse_pair("x-from-y"), InvalidPair);
}

TEST_CASE("closed forms in floating point match the exact values") {
  PairParams<double> a{0.3, 0.8, -0.4, 0.25, 0.6};
  PairParams<Rational> e{exact_from_double(0.3), exact_from_double(0.8), exact_from_double(-0.4),
                         exact_from_double(0.25), exact_from_double(0.6)};
  for (ConnectionPair p : kAllPairs) {
    for (int n = 0; n <= 10; ++n) {
      const auto rd = connect_closed_form(p, a, n);
      const auto re = connect_closed_form(p, e, n);
      for (int k = 0; k <= n; ++k) {
        CHECK_THAT(rd[static_cast<std::size_t>(k)], WithinAbs(re[static_cast<std::size_t>(k)].get_d(), 1e-10));
      }
    }
  }
}
