// A short tour of the library: polynomials, exact connection coefficients,
// densities, a Poisson-Mehler expansion and the rejection sampler.

#include <cstdio>

#include "qortho/qortho.hpp"

using namespace qortho;

int main() {
  const double q = 0.5;

  std::printf("q-Hermite H_n(1|%.1f):", q);
  const auto h = eval_all(Family<double>::qhermite(q), 5, 1.0);
  for (double v : h) std::printf(" %g", v);
  std::printf("\n");

  // exact: Al-Salam-Chihara in the q-Hermite basis at q = 1/2, y = 1/3, rho = 1/4
  PairParams<Rational> a;
  a.q = Rational(1, 2);
  a.y = Rational(1, 3);
  a.rho = Rational(1, 4);
  const auto row = connect_closed_form(ConnectionPair::AscFromHermite, a, 3);
  std::printf("P_3 = ");
  for (int k = 3; k >= 0; --k) std::printf("%s(%s) H_%d", k < 3 ? " + " : "", to_string(row[k]).c_str(), k);
  std::printf("\n");

  const DensityId cn = DensityId::conditional(0.5, 0.4, q);
  ExpansionParams<double> p;
  p.q = q;
  p.y = 0.5;
  p.rho = 0.4;
  const ExpansionSeries series(ExpansionId::CNOverN, p);
  std::printf("\n%8s %20s %20s %6s\n", "x", "fCN(x)", "fN(x) * series", "terms");
  for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    const ExpansionValue v = expansion_eval(series, x);
    std::printf("%8.2f %20.15f %20.15f %6d\n", x, density_eval(cn, x), v.value, v.terms);
  }

  SamplerConfig sc;
  sc.density = DensityId::normal(q);
  sc.seed = 2024;
  const SampleResult s = sample(sc, 50000);
  std::printf("\nfN(.|%.1f): M = %.4f, acceptance %.4f (expected %.4f), KS = %.4f (5%% critical %.4f)\n", q, s.M,
              s.acceptance_rate(), 1.0 / s.M, ks_statistic(s.samples, sc.density), 1.36 / std::sqrt(50000.0));
  return 0;
}
