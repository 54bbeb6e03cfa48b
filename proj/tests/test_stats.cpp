#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dvqr/stats.hpp"

using namespace dvqr;

TEST_CASE("normal cdf/quantile round trips and known points") {
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(norm_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(norm_quantile(0.95) == doctest::Approx(1.6448536269514727).epsilon(1e-13));
  for (double p : {1e-10, 1e-4, 0.2, 0.5, 0.9, 1.0 - 1e-7}) {
    CHECK(norm_cdf(norm_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK_THROWS_AS(norm_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(norm_quantile(1.0), std::domain_error);
}

TEST_CASE("bivariate normal cdf") {
  // rho = 0: product of margins
  CHECK(bvn_cdf(0.3, -0.4, 0.0) ==
        doctest::Approx(norm_cdf(0.3) * norm_cdf(-0.4)).epsilon(1e-14));
  // closed form at the origin: 1/4 + asin(rho)/(2 pi)
  for (double rho : {-0.95, -0.5, 0.2, 0.7, 0.99}) {
    CHECK(bvn_cdf(0.0, 0.0, rho) ==
          doctest::Approx(0.25 + std::asin(rho) / (2.0 * 3.14159265358979324))
              .epsilon(1e-13));
  }
  // margins
  CHECK(bvn_cdf(8.5, 0.3, 0.6) == doctest::Approx(norm_cdf(0.3)).epsilon(1e-12));
  // comonotone limit
  CHECK(bvn_cdf(0.5, 1.2, 1.0) == doctest::Approx(norm_cdf(0.5)).epsilon(1e-14));
}

TEST_CASE("student t against known quantiles") {
  CHECK(t_cdf(0.0, 7.0) == doctest::Approx(0.5).epsilon(1e-14));
  // t_4 0.975-quantile = 2.7764451051977934
  CHECK(t_quantile(0.975, 4.0) == doctest::Approx(2.7764451051977934).epsilon(1e-12));
  CHECK(t_cdf(t_quantile(0.3, 3.0), 3.0) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("kendall tau on monotone and mixed data") {
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> y = {2, 4, 6, 8, 10};
  CHECK(kendall_tau(x, y) == doctest::Approx(1.0));
  std::vector<double> yr(y.rbegin(), y.rend());
  CHECK(kendall_tau(x, yr) == doctest::Approx(-1.0));
  // hand-counted: x=(1,2,3), y=(3,1,2): discordant pairs {12},{13} -> tau = -1/3
  std::vector<double> a = {1, 2, 3}, b = {3, 1, 2};
  CHECK(kendall_tau(a, b) == doctest::Approx(-1.0 / 3.0));
  // against the O(n^2) definition on random data
  Rng rng(11);
  std::vector<double> u(200), v(200);
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = rng.normal();
    v[i] = 0.5 * u[i] + rng.normal();
  }
  double conc = 0;
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = i + 1; j < u.size(); ++j)
      conc += ((u[i] - u[j]) * (v[i] - v[j]) > 0) ? 1.0 : -1.0;
  const double tau_n2 = conc / (0.5 * 200 * 199);
  CHECK(kendall_tau(u, v) == doctest::Approx(tau_n2).epsilon(1e-12));
}

TEST_CASE("cholesky solve and failure on indefinite input") {
  Matrix a = {{4, 2, 0.5}, {2, 3, 1}, {0.5, 1, 2}};
  Matrix L = cholesky(a);
  std::vector<double> b = {1, -2, 0.5};
  std::vector<double> x = chol_solve(L, b);
  for (int i = 0; i < 3; ++i) {
    double s = 0;
    for (int j = 0; j < 3; ++j) s += a[i][j] * x[j];
    CHECK(s == doctest::Approx(b[i]).epsilon(1e-12));
  }
  Matrix bad = {{1, 2}, {2, 1}};
  CHECK_THROWS_AS(cholesky(bad), NumericError);
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  auto f = [](double x) { return 5 * x * x * x * x - x + 2; };
  // exact integral over [0,2]: 32 - 2 + 4 = 34
  CHECK(integrate_gl(f, 0, 2, 16) == doctest::Approx(34.0).epsilon(1e-14));
  // graded mesh handles t*log(t): integral over (0,1] is -1/4
  CHECK(integrate_graded([](double t) { return t * std::log(t); }, 0, 1, 16) ==
        doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("brent finds interior minimum") {
  auto f = [](double x) { return (x - 0.3) * (x - 0.3) + 1.0; };
  CHECK(brent_minimize(f, -1, 2, 1e-12) == doctest::Approx(0.3).epsilon(1e-8));
}

TEST_CASE("invert_monotone solves and reports failure modes") {
  auto f = [](double x) { return x * x * x; };
  CHECK(invert_monotone(f, 0.008, 0, 1) == doctest::Approx(0.2).epsilon(1e-10));
  // out-of-range targets clamp to the endpoints
  CHECK(invert_monotone(f, 5.0, 0, 1) == doctest::Approx(1.0));
  CHECK(invert_monotone(f, -1.0, 0, 1) == doctest::Approx(0.0));
}

TEST_CASE("rng determinism and variate moments") {
  Rng a(123), b(123);
  for (int i = 0; i < 5; ++i) CHECK(a.uniform() == b.uniform());

  Rng rng(2024);
  double sum = 0, sumsq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double g = rng.gamma(3.0);
    sum += g;
    sumsq += g * g;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(mean == doctest::Approx(3.0).epsilon(0.02));
  CHECK(var == doctest::Approx(3.0).epsilon(0.05));

  // chi-square mean = nu
  Rng rng2(7);
  double s = 0;
  for (int i = 0; i < 100000; ++i) s += rng2.chisq(3.0);
  CHECK(s / 100000 == doctest::Approx(3.0).epsilon(0.03));
}

TEST_CASE("derive_seed decorrelates replication streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  Rng a(derive_seed(9, 0)), b(derive_seed(9, 1));
  std::vector<double> xa(500), xb(500);
  for (int i = 0; i < 500; ++i) {
    xa[i] = a.normal();
    xb[i] = b.normal();
  }
  CHECK(std::fabs(kendall_tau(xa, xb)) < 0.08);
}
