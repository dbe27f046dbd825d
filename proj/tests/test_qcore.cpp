#include <catch_amalgamated.hpp>

#include <cmath>

#include "qortho/qcore.hpp"
#include "support.hpp"

using namespace qortho;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("q_bracket base cases") {
  CHECK(q_bracket<Rational>(0, Rational(1, 3)) == 0);
  CHECK(q_bracket<Rational>(3, Rational(1)) == 3);
  CHECK(q_bracket<Rational>(3, Rational(1, 2)) == Rational(7, 4));
  CHECK(q_bracket<double>(5, 0.0) == 1.0);
}

TEST_CASE("q_factorial and double factorial") {
  const Rational q(2, 7);
  CHECK(q_factorial<Rational>(2, q) == 1 + q);
  CHECK(q_factorial<Rational>(0, q) == 1);
  CHECK(q_double_factorial_odd<Rational>(0, q) == 1);
  CHECK(q_double_factorial_odd<Rational>(2, q) == (1 + q + q * q));
}

TEST_CASE("q_binomial(4,2) is 1+q+2q^2+q^3+q^4") {
  qtest::Draw draw(11);
  for (int i = 0; i < 25; ++i) {
    const Rational q = draw.rational(-1.0, 1.0);
    const Rational expected = 1 + q + 2 * q * q + q * q * q + q * q * q * q;
    CHECK(q_binomial<Rational>(4, 2, q) == expected);
  }
  CHECK(q_binomial<Rational>(3, 5, Rational(1, 2)) == 0);
  CHECK(q_binomial<Rational>(3, -1, Rational(1, 2)) == 0);
}

TEST_CASE("q_binomial at q = -1 goes through q-Pascal") {
  // [n k]_{-1}: 0 when n even and k odd, otherwise C(floor(n/2), floor(k/2)).
  CHECK(q_binomial<Rational>(4, 1, Rational(-1)) == 0);
  CHECK(q_binomial<Rational>(4, 2, Rational(-1)) == 2);
  CHECK(q_binomial<Rational>(5, 2, Rational(-1)) == 2);
  CHECK(q_binomial<Rational>(6, 3, Rational(-1)) == 0);
  CHECK(q_binomial<Rational>(7, 3, Rational(-1)) == 3);
}

TEST_CASE("q_binomial symmetry and q-Pascal rule on random rationals") {
  qtest::Draw draw(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Rational q = draw.rational(-1.0, 1.0);
    for (int n = 0; n <= 12; ++n) {
      for (int k = 0; k <= n; ++k) {
        CHECK(q_binomial<Rational>(n, k, q) == q_binomial<Rational>(n, n - k, q));
        if (n >= 1 && k >= 1) {
          CHECK(q_binomial<Rational>(n, k, q) ==
                q_binomial<Rational>(n - 1, k - 1, q) + ipow(q, k) * q_binomial<Rational>(n - 1, k, q));
        }
      }
    }
  }
}

TEST_CASE("q_pochhammer finite values") {
  CHECK(q_pochhammer<Rational>(Rational(1, 2), Rational(1, 2), 3) == Rational(21, 64));
  CHECK(q_pochhammer<Rational>(Rational(5, 3), Rational(1, 2), 0) == 1);
}

TEST_CASE("(q;q)_n = (1-q)^n [n]_q! for n <= 20") {
  qtest::Draw draw(13);
  for (int trial = 0; trial < 8; ++trial) {
    const Rational q = draw.rational(-1.0, 1.0);
    for (int n = 0; n <= 20; ++n) {
      CHECK(q_pochhammer<Rational>(q, q, n) == ipow(Rational(1 - q), n) * q_factorial<Rational>(n, q));
    }
  }
}

TEST_CASE("(1-q)^k [2k-1]_q!! = (q;q^2)_k, not (q;q^2)_{k-1}") {
  qtest::Draw draw(14);
  for (int trial = 0; trial < 8; ++trial) {
    const Rational q = draw.rational(-0.95, 0.95);
    const Rational q2 = q * q;
    for (int k = 1; k <= 15; ++k) {
      const Rational lhs = ipow(Rational(1 - q), k) * q_double_factorial_odd<Rational>(k, q);
      Rational prod(1);
      for (int i = 1; i <= k; ++i) prod *= 1 - ipow(q, 2 * i - 1);
      CHECK(lhs == prod);
      CHECK(lhs == q_pochhammer<Rational>(q, q2, k));
      if (q != 0) CHECK(lhs != q_pochhammer<Rational>(q, q2, k - 1));
    }
  }
}

TEST_CASE("W_n(q) small cases") {
  const Rational q(3, 5);
  CHECK(rogers_szego_sum<Rational>(0, q) == 1);
  CHECK(rogers_szego_sum<Rational>(2, q) == 3 + q);
  CHECK(rogers_bound_sum<Rational>(3, q, Rational(0)) * q_pochhammer<Rational>(q, q, 3) ==
        rogers_szego_sum<Rational>(3, q));
}

TEST_CASE("support interval") {
  const SupportInterval s = support(0.5);
  CHECK_THAT(s.hi, WithinRel(2.0 / std::sqrt(0.5), 1e-15));
  CHECK(s.lo == -s.hi);
  CHECK(s.contains(s.hi));
  CHECK_FALSE(s.interior(s.hi));
  CHECK_THROWS_AS(support(1.0), InvalidParameter);
  CHECK_THROWS_AS(QParam::checked(1.0), InvalidParameter);
  CHECK(QParam::checked(1.0, true).classical());
}

TEST_CASE("q_pochhammer_inf agrees with a long finite product") {
  for (double q : {-0.9, -0.5, 0.0, 0.3, 0.7, 0.95}) {
    for (double a : {q, 0.25, -0.6, q * q}) {
      long double ref = 1.0L;
      for (int k = 0; k < 20000; ++k) ref *= 1.0L - static_cast<long double>(a) * std::pow(static_cast<long double>(q), k);
      const TruncatedValue v = q_pochhammer_inf(a, q, 1e-14);
      CHECK_THAT(v.value, WithinAbs(static_cast<double>(ref), 1e-13 * std::abs(static_cast<double>(ref)) + 1e-300));
      CHECK(v.error <= 1e-13 * std::abs(v.value) + 1e-300);
    }
  }
  CHECK_THROWS_AS(q_pochhammer_inf(0.5, 1.0), InvalidParameter);
  CHECK(q_pochhammer_inf(0.3, 0.0).value == 0.7);
}

TEST_CASE("log_product tail bound covers the neglected factors") {
  // stop early with a loose eps, compare against a tight evaluation
  for (double q : {0.5, -0.8, 0.9}) {
    const auto f = [&](int k) { return 1.0 + 0.7 * std::pow(q, k); };
    const LogProduct loose = log_product(f, 0.7, q, 1e-4);
    const LogProduct tight = log_product(f, 0.7, q, 1e-15);
    CHECK(std::abs(loose.log_abs - tight.log_abs) <= loose.log_error);
  }
  CHECK_THROWS_AS(log_product([](int) { return 1.0; }, 1.0, 0.999, 1e-14), Nonconvergence);
}

TEST_CASE("Scalar routes literals to the right backend") {
  CHECK(Scalar::parse("1/2").exact());
  CHECK(Scalar::parse("-3").exact());
  CHECK_FALSE(Scalar::parse("0.5").exact());
  CHECK(Scalar::parse("0.5").as_double() == 0.5);
  CHECK_THROWS_AS(Scalar::parse("0.5").as_exact(), IrrationalParameter);
  CHECK_THROWS_AS(parse_rational("0.5"), IrrationalParameter);
  CHECK_THROWS_AS(Scalar::parse("abc"), Error);
  CHECK(parse_rational("+6/4") == Rational(3, 2));
}
