#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dvqr/simbench.hpp"
#include "test_support.hpp"

using namespace dvqr;

TEST_CASE("gen_scenario C3: margins and dependence strength") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::C3;
  spec.delta = 0.86;
  spec.margins = MarginSet::M1;
  spec.n_train = 2000;
  ScenarioData data = gen_scenario(spec, 0, 11);
  REQUIRE(data.train.names == std::vector<std::string>{"Y", "X1", "X2"});
  REQUIRE(data.train.nrows() == 2000);
  REQUIRE(data.eval_x.size() == 1000);

  // Y margin is standard normal
  const double crit = 1.6276 / std::sqrt(2000.0);
  CHECK(testsup::ks_statistic(data.train.cols[0],
                              [](double x) { return norm_cdf(x); }) < crit);
  // pairwise tau(Y, X1) = 0.86 / 2.86
  CHECK(kendall_tau(data.train.cols[0], data.train.cols[1]) ==
        doctest::Approx(0.86 / 2.86).epsilon(0.12));

  // truth handle is the marginal-transformed closed form
  const double x[] = {0.5, 1.0};
  const double got = data.truth(0.95, x);
  const double v = t_cdf(0.5, 4.0);
  const double w = norm_cdf((1.0 - 1.0) / 2.0);
  CHECK(got == doctest::Approx(norm_quantile(
                   clayton3_cond_quantile(0.86, 0.95, v, w))).epsilon(1e-9));
}

TEST_CASE("gen_scenario t5: correlation near the R1 entry") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::T5;
  spec.r_name = "r1";
  spec.n_train = 1000;
  ScenarioData data = gen_scenario(spec, 0, 5);
  REQUIRE(data.train.ncols() == 5);
  CHECK(testsup::pearson(data.train.cols[0], data.train.cols[1]) ==
        doctest::Approx(0.6).epsilon(0.09));
}

TEST_CASE("gen_scenario M5: zero-noise truth is the deterministic surface") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::M5;
  spec.sigma = 0.0;
  spec.n_train = 200;
  ScenarioData data = gen_scenario(spec, 1, 3);
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& x = data.eval_x[i];
    const double surface = std::sqrt(std::fabs(2 * x[0] - x[1] + 0.5)) +
                           (-0.5 * x[2] + 1.0) * (0.1 * x[3] * x[3] * x[3]);
    CHECK(data.truth(0.5, x) == doctest::Approx(surface).epsilon(1e-12));
    // independent of alpha at sigma = 0
    CHECK(data.truth(0.95, x) == doctest::Approx(data.truth(0.05, x)).epsilon(1e-12));
  }
  // the training response carries no noise either
  for (std::size_t i = 0; i < 20; ++i) {
    std::vector<double> x = {data.train.cols[1][i], data.train.cols[2][i],
                             data.train.cols[3][i], data.train.cols[4][i]};
    CHECK(data.train.cols[0][i] == doctest::Approx(data.truth(0.5, x)).epsilon(1e-12));
  }

  // determinism across calls
  ScenarioData again = gen_scenario(spec, 1, 3);
  CHECK(again.train.cols[0][7] == data.train.cols[0][7]);
}

TEST_CASE("lqr: exact fit, gaussian noise quantiles, OLS comparison") {
  // y = 2x + 1 exactly, any alpha
  Matrix x;
  std::vector<double> y;
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    const double xi = rng.normal();
    x.push_back({xi});
    y.push_back(2.0 * xi + 1.0);
  }
  for (double alpha : {0.2, 0.5, 0.9}) {
    LqrModel m = lqr_fit(x, y, alpha);
    CHECK(m.beta[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(m.beta[1] == doctest::Approx(2.0).epsilon(1e-4));
  }

  // y = x + eps: alpha = 0.95 shifts the intercept by the noise quantile
  Matrix x2;
  std::vector<double> y2;
  Rng rng2(23);
  for (int i = 0; i < 2000; ++i) {
    const double xi = rng2.normal();
    x2.push_back({xi});
    y2.push_back(xi + rng2.normal());
  }
  LqrModel m95 = lqr_fit(x2, y2, 0.95);
  CHECK(m95.beta[0] == doctest::Approx(1.6449).epsilon(0.07));
  CHECK(m95.beta[1] == doctest::Approx(1.0).epsilon(0.05));

  // median-fit objective beats the OLS coefficients (a feasible point)
  Matrix xa;
  std::vector<double> ya;
  Rng rng3(31);
  for (int i = 0; i < 500; ++i) {
    const double xi = rng3.normal();
    xa.push_back({xi});
    ya.push_back(0.5 * xi + t_quantile(rng3.uniform(), 3.0));
  }
  LqrModel med = lqr_fit(xa, ya, 0.5);
  // OLS closed form
  double sx = 0, sy = 0, sxy = 0, sxx = 0;
  for (int i = 0; i < 500; ++i) {
    sx += xa[i][0];
    sy += ya[i];
  }
  sx /= 500;
  sy /= 500;
  for (int i = 0; i < 500; ++i) {
    sxy += (xa[i][0] - sx) * (ya[i] - sy);
    sxx += (xa[i][0] - sx) * (xa[i][0] - sx);
  }
  const std::vector<double> ols = {sy - sxy / sxx * sx, sxy / sxx};
  CHECK(lqr_objective(med.beta, xa, ya, 0.5) <=
        lqr_objective(ols, xa, ya, 0.5) + 1e-9);

  // rank-deficient design
  Matrix xdup;
  std::vector<double> ydup;
  for (int i = 0; i < 50; ++i) {
    const double xi = i * 0.1;
    xdup.push_back({xi, 2.0 * xi});
    ydup.push_back(xi);
  }
  CHECK_THROWS_AS(lqr_fit(xdup, ydup, 0.5), NumericError);
}

TEST_CASE("tick loss") {
  std::vector<double> y = {1.0, -1.0};
  std::vector<double> q = {0.0, 0.0};
  CHECK(tick_loss(y, q, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  std::vector<double> y1 = {1.0}, q1 = {0.0};
  CHECK(tick_loss(y1, q1, 0.99) == doctest::Approx(0.99).epsilon(1e-15));
  CHECK(tick_loss(y, y, 0.7) == 0.0);

  // shift invariance
  std::vector<double> ys = {2.5, 0.5}, qs = {1.5, 1.5};
  CHECK(tick_loss(ys, qs, 0.31) == doctest::Approx(tick_loss(y, q, 0.31)).epsilon(1e-14));

  std::vector<double> q2 = {0.0};
  CHECK_THROWS_AS(tick_loss(y, q2, 0.5), std::invalid_argument);
}

TEST_CASE("C3 high dependence at n=1000 selects both covariates") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::C3;
  spec.delta = 4.67;
  spec.n_train = 1000;
  ScenarioData data = gen_scenario(spec, 0, 2027);
  QuantRegModel m = fit_quantreg(data.train, "Y", FitCriterion::AIC, 0.05);
  REQUIRE(m.vine.order.size() == 2);
  // MISE of the truth handle against itself is exactly zero
  double mise_truth = 0.0;
  for (const auto& x : data.eval_x) {
    const double d = data.truth(0.5, x) - data.truth(0.5, x);
    mise_truth += d * d;
  }
  CHECK(mise_truth == 0.0);
}

TEST_CASE("run_mise_study structure and RMISE definition") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::C3;
  spec.delta = 4.67;
  spec.n_train = 100;
  spec.alphas = {0.5, 0.95};
  spec.replications = 2;
  StudyReport rep = run_mise_study(spec, {"DVQR", "LQR"}, 77);
  REQUIRE(rep.rows.size() == 4);
  for (const auto& r : rep.rows) {
    CHECK(r.mise >= 0.0);
    if (r.method == "DVQR") CHECK(r.rmise == doctest::Approx(1.0));
    CHECK(r.failures == 0);
  }
  // deterministic given the seed
  StudyReport rep2 = run_mise_study(spec, {"DVQR", "LQR"}, 77);
  for (std::size_t i = 0; i < rep.rows.size(); ++i)
    CHECK(rep.rows[i].mise == rep2.rows[i].mise);

  CHECK_THROWS_AS(run_mise_study(spec, {"NPQR"}, 1), std::invalid_argument);

  // csv schema
  const std::string csv = rep.to_csv();
  CHECK(csv.find("scenario,margins,parameter,n_train,alpha,method,mise,rmise,"
                 "seconds,failures") == 0);
}

TEST_CASE("oos_backtest on a synthetic t-copula panel") {
  // meta-t panel: a response plus three peers with strong dependence
  Matrix r = {{1.0, 0.7, 0.6, 0.5},
              {0.7, 1.0, 0.6, 0.5},
              {0.6, 0.6, 1.0, 0.5},
              {0.5, 0.5, 0.5, 1.0}};
  int dvqr_wins_001 = 0;
  int median_close = 0;
  for (int seed = 0; seed < 10; ++seed) {
    MvtSpec spec{3.0, std::vector<double>(4, 0.0), r};
    Matrix z = sample_mvt(spec, 400, derive_seed(900, seed));
    DataTable t;
    t.names = {"Y", "P1", "P2", "P3"};
    t.cols.assign(4, {});
    for (const auto& row : z)
      for (int c = 0; c < 4; ++c) t.cols[c].push_back(row[c]);
    StudyReport rep =
        oos_backtest(t, "Y", 300, {0.01, 0.5}, {"DVQR", "LQR"}, 1);
    double dv001 = 0, lq001 = 0, dv5 = 0, lq5 = 0;
    for (const auto& row : rep.rows) {
      if (row.method == "DVQR" && row.alpha == 0.01) dv001 = row.mise;
      if (row.method == "LQR" && row.alpha == 0.01) lq001 = row.mise;
      if (row.method == "DVQR" && row.alpha == 0.5) dv5 = row.mise;
      if (row.method == "LQR" && row.alpha == 0.5) lq5 = row.mise;
    }
    if (dv001 < lq001) dvqr_wins_001++;
    if (std::fabs(dv5 - lq5) < 0.1 * std::max(dv5, lq5)) median_close++;
  }
  CHECK(dvqr_wins_001 >= 6);   // majority: vine captures the fat joint tails
  CHECK(median_close >= 6);    // medians of a symmetric panel nearly tie

  // deterministic given the inputs
  {
    MvtSpec spec{3.0, std::vector<double>(4, 0.0), r};
    Matrix z = sample_mvt(spec, 400, derive_seed(900, 0));
    DataTable t;
    t.names = {"Y", "P1", "P2", "P3"};
    t.cols.assign(4, {});
    for (const auto& row : z)
      for (int c = 0; c < 4; ++c) t.cols[c].push_back(row[c]);
    StudyReport r1 = oos_backtest(t, "Y", 300, {0.5}, {"DVQR", "LQR"}, 7);
    StudyReport r2 = oos_backtest(t, "Y", 300, {0.5}, {"DVQR", "LQR"}, 7);
    REQUIRE(r1.rows.size() == r2.rows.size());
    for (std::size_t i = 0; i < r1.rows.size(); ++i)
      CHECK(r1.rows[i].mise == r2.rows[i].mise);
  }

  // split preconditions
  DataTable small;
  small.names = {"Y", "X"};
  small.cols = {std::vector<double>(80, 0.0), std::vector<double>(80, 0.0)};
  CHECK_THROWS_AS(oos_backtest(small, "Y", 40, {0.5}, {"LQR"}, 1),
                  std::invalid_argument);
}

TEST_CASE("scenario validation errors") {
  ScenarioSpec bad;
  bad.kind = ScenarioKind::C3;
  bad.delta = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  ScenarioSpec badr;
  badr.kind = ScenarioKind::T5;
  badr.r_name = "r9";
  CHECK_THROWS_AS(badr.validate(), std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_name("x7"), std::invalid_argument);
}
