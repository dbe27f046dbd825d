#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "qortho/verify.hpp"
#include "support.hpp"

using namespace qortho;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::StartsWith;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("quadrature on S(q)", "[verify][quadrature]") {
  for (double q : {-0.5, 0.0, 0.3, 0.7, 0.9}) {
    const auto fu = DensityId::semicircle(q);
    const auto ft = DensityId::arcsine(q);
    CHECK_THAT(integrate([&](double x, double r) { return density_eval(fu, x, r); }, q).value, WithinAbs(1.0, 1e-12));
    CHECK_THAT(integrate([&](double x, double r) { return density_eval(ft, x, r); }, q).value, WithinAbs(1.0, 1e-12));
  }
  const auto fn0 = DensityId::normal(0.0);
  CHECK_THAT(integrate([&](double x, double r) { return x * x * density_eval(fn0, x, r); }, 0.0).value,
             WithinAbs(1.0, 1e-10));
  CHECK_THAT(integrate_interval([](double x) { return std::exp(-x * x / 2); }, -14, 14).value,
             WithinRel(std::sqrt(2 * std::numbers::pi), 1e-14));
}

TEST_CASE("Gauss-Legendre in theta resolves Chebyshev products to rounding", "[verify][quadrature]") {
  for (double q : {-0.5, 0.3, 0.7}) {
    const QuadratureRule rule = make_rule(q, 128);
    const auto fu = DensityId::semicircle(q);
    const Family<double> u = Family<double>::cheb_u_hat(q);
    for (int n = 0; n <= 20; ++n) {
      for (int m = 0; m <= 20; ++m) {
        const double v = apply_rule(rule, [&](double x, double r) {
          const auto p = eval_all(u, 20, x);
          return p[static_cast<std::size_t>(n)] * p[static_cast<std::size_t>(m)] * density_eval(fu, x, r);
        });
        const double expected = n == m ? squared_norm(u, n) : 0.0;
        CHECK_THAT(v, WithinAbs(expected, 1e-13 * std::max(1.0, squared_norm(u, std::max(n, m)))));
      }
    }
  }
}

TEST_CASE("orthogonality checks at documented points", "[verify]") {
  const auto a = check_orthogonality(Family<double>::qhermite(0.5), DensityId::normal(0.5), 2, 2, 1e-9);
  CHECK(a.pass);
  CHECK_THAT(a.params["value"].get<double>(), WithinAbs(1.5, 1e-9));
  CHECK(check_orthogonality(Family<double>::qhermite(0.3), 3, 1, 1e-9).pass);
  const double y = 0.4, rho = 0.6, q = 0.2;
  const auto c = check_orthogonality(Family<double>::asc(y, rho, q), 2, 2);
  CHECK(c.pass);
  CHECK_THAT(c.params["value"].get<double>(),
             WithinAbs(q_pochhammer<double>(rho * rho, q, 2) * q_factorial<double>(2, q), 1e-8));
  CHECK(check_orthogonality(Family<double>::classical_hermite(), 4, 4).pass);
  CHECK(check_orthogonality(Family<double>::kesten(0.5, 0.3), 3, 3).pass);
  CHECK_THROWS_AS(orthogonality_density(Family<double>::big_b(0.3)), UnsupportedPair);
}

TEST_CASE("Gram matrices over random parameters", "[verify][property]") {
  qtest::Draw draw(5150);
  for (int t = 0; t < 8; ++t) {
    const double q = draw.real(-0.7, 0.8);
    const double L = support_radius(q);
    const double y = draw.real(-0.9 * L, 0.9 * L);
    const double rho = draw.real(-0.8, 0.8);
    const double beta = draw.real(-0.8, 0.8);
    INFO("q=" << q << " y=" << y << " rho=" << rho << " beta=" << beta);
    CHECK(check_gram("g", Family<double>::qhermite(q), 8, 1e-8).pass);
    CHECK(check_gram("g", Family<double>::asc(y, rho, q), 8, 1e-8).pass);
    CHECK(check_gram("g", Family<double>::rogers(beta, q), 8, 1e-8).pass);
    CHECK(check_gram("g", Family<double>::kesten_hat(y, rho, q), 8, 1e-10, true).pass);
  }
}

TEST_CASE("projections", "[verify]") {
  const auto zero = check_projection(0, 0.7, 0.5, 0.3);
  CHECK(zero.pass);
  CHECK(zero.residual < 1e-12);
  for (double q : {-0.5, 0.3, 0.7}) {
    CHECK(check_projection(1, 0.9, 0.4, q, 1e-9).pass);
    for (int n = 1; n <= 6; ++n) {
      const auto r = check_projection(n, 1.1, 0.0, q, 1e-9);
      CHECK(r.pass);
    }
  }
  CHECK(check_projection(3, 0.4, 0.5, 1.0).pass);
}

TEST_CASE("Chapman-Kolmogorov", "[verify]") {
  const auto trivial = check_chapman(0.4, -1.0, 0.0, 0.6, 0.5);
  CHECK(trivial.residual < 1e-12);
  CHECK(check_chapman(0.0, 0.0, 0.5, 0.4, 0.3).pass);
  CHECK(check_chapman(1.2, -0.7, -0.6, 0.7, -0.4).pass);
  const auto gauss = check_chapman(0.9, -1.3, 0.5, 0.4, 1.0);
  CHECK(gauss.pass);
  CHECK(gauss.residual < 1e-12);
}

TEST_CASE("D integral", "[verify]") {
  for (double q : {-0.5, 0.3, 0.7}) {
    const double y = 0.5, rho = 0.4;
    for (int n = 0; n <= 6; ++n) {
      const auto r = check_D_integral(n, n, y, rho, q);
      CHECK(r.pass);
      CHECK_THAT(r.params["rhs"].get<double>(),
                 WithinRel(std::pow(1 - q, n / 2.0) * q_pochhammer<double>(rho * rho, q, n) * q_factorial<double>(n, q),
                           1e-12));
    }
    CHECK(check_D_integral(0, 1, y, rho, q).pass);
    CHECK(check_D_integral(1, 4, y, 1e-12, q).pass);
  }
  CHECK_THROWS_AS(check_D_integral(3, 2, 0, 0.5, 0.3), InvalidParameter);
}

TEST_CASE("exact tables", "[verify][exact]") {
  for (const auto& r : special_value_reports(20, 3)) {
    INFO(r.check_id);
    CHECK(r.exact);
    CHECK(r.pass);
  }
  for (const auto& r : degeneration_reports(20, 3)) {
    INFO(r.check_id);
    CHECK(r.pass);
  }
  for (const auto& r : connect_exact_reports(8, 3)) {
    INFO(r.check_id);
    CHECK(r.pass);
  }
  for (const auto& r : ratio_construction_reports()) {
    INFO(r.check_id);
    CHECK(r.pass);
  }
}

TEST_CASE("sup bounds on the grid", "[verify]") {
  for (double q : {-0.5, 0.0, 0.6}) {
    CHECK(check_max_bound(FamilyTag::QHermite, q, 0.0, 15).pass);
    CHECK(check_max_bound(FamilyTag::Rogers, q, 0.5, 15).pass);
  }
  CHECK_FALSE(check_max_bound(FamilyTag::ASC, 0.3, 0.0, 5).pass);
}

TEST_CASE("run_all", "[verify][slow]") {
  SECTION("default registry passes") {
    const auto reports = run_all();
    CHECK(reports.size() > 200);
    for (const auto& r : reports) {
      INFO(r.check_id << ' ' << r.params.dump() << ' ' << r.residual);
      CHECK(r.pass);
    }
    CHECK(std::is_sorted(reports.begin(), reports.end(),
                         [](const auto& a, const auto& b) { return a.check_id < b.check_id; }));
  }
  SECTION("selection by id runs one check") {
    VerifyConfig c;
    c.select = {"projection/q=0.3,y=1,rho=0.3"};
    const auto reports = run_all(c);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].check_id == "projection/q=0.3,y=1,rho=0.3");
  }
  SECTION("zero tolerance fails every numeric check") {
    VerifyConfig c;
    c.select = {"projection", "orthogonality/qhermite", "special"};
    c.tol = 0.0;
    const auto reports = run_all(c);
    REQUIRE_FALSE(reports.empty());
    for (const auto& r : reports) CHECK(r.pass == r.exact);
    CHECK_FALSE(all_pass(reports));
  }
  SECTION("serial and parallel runs agree") {
    VerifyConfig c;
    c.select = {"dintegral", "maxbound"};
    const auto a = run_all(c);
    c.parallel = false;
    const auto b = run_all(c);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].check_id == b[i].check_id);
      CHECK(a[i].residual == b[i].residual);
    }
  }
}

TEST_CASE("doubling nodes keeps passing checks passing", "[verify][property]") {
  for (double q : {-0.5, 0.7}) {
    const Family<double> f = Family<double>::asc(0.3, 0.5, q);
    const DensityId d = orthogonality_density(f);
    for (int nodes : {128, 256, 512}) {
      QuadratureOptions opt;
      opt.initial_nodes = nodes;
      opt.max_nodes = 2 * nodes;
      opt.tol = 1e-10;
      const auto g = gram_matrix(f, d, 8, opt);
      for (int n = 0; n <= 8; ++n) {
        for (int m = 0; m <= 8; ++m) {
          const double expected = n == m ? squared_norm(f, n) : 0.0;
          CHECK(std::abs(g[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)] - expected) < 1e-8);
        }
      }
    }
  }
}

TEST_CASE("report CSV", "[verify]") {
  nlohmann::ordered_json p;
  p["q"] = 0.5;
  p["note"] = "a \"quoted\" word";
  const std::vector<VerificationReport> v{VerificationReport::numeric("b", p, 1e-12, 1e-8),
                                          VerificationReport::exact_check("a", {}, 2),
                                          VerificationReport::failed("c", {}, 1e-8, "no convergence")};
  const std::string csv = to_csv(v);
  CHECK_THAT(csv, StartsWith("check_id,params_json,residual,tolerance,pass\n"));
  CHECK_THAT(csv, ContainsSubstring("b,\"{\"\"q\"\":0.5,\"\"note\"\":\"\"a \\\"\"quoted\\\"\" word\"\"}\",1e-12,1e-08,true"));
  CHECK_THAT(csv, ContainsSubstring("a,\"{}\",2.0,0.0,false"));
  CHECK_THAT(csv, ContainsSubstring("c,\"{\"\"error\"\":\"\"no convergence\"\"}\",inf,1e-08,false"));
  CHECK(VerificationReport::numeric("t", {}, 0.0, 0.0).pass == false);
  CHECK(VerificationReport::numeric("t", {}, std::nan(""), 1.0).pass == false);
  CHECK(VerificationReport::exact_check("t", {}, 0).pass);
}
