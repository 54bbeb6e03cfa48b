#include "dvqr/simbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

namespace dvqr {

ScenarioKind scenario_from_name(const std::string& name) {
  if (name == "c3" || name == "C3") return ScenarioKind::C3;
  if (name == "t5" || name == "T5") return ScenarioKind::T5;
  if (name == "m5" || name == "M5") return ScenarioKind::M5;
  throw std::invalid_argument("unknown scenario '" + name +
                              "' (expected c3|t5|m5)");
}

const char* scenario_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::C3: return "C3";
    case ScenarioKind::T5: return "t5";
    case ScenarioKind::M5: return "M5";
  }
  return "?";
}

std::string ScenarioSpec::parameter_label() const {
  char buf[32];
  switch (kind) {
    case ScenarioKind::C3:
      std::snprintf(buf, sizeof(buf), "delta=%g", delta);
      return buf;
    case ScenarioKind::T5:
      return r_name == "r2" ? "R2" : "R1";
    case ScenarioKind::M5:
      std::snprintf(buf, sizeof(buf), "sigma=%g", sigma);
      return buf;
  }
  return "?";
}

void ScenarioSpec::validate() const {
  if (kind == ScenarioKind::C3 && !(delta > 0.0))
    throw std::invalid_argument("scenario C3 requires delta > 0");
  if (kind == ScenarioKind::T5 && r_name != "r1" && r_name != "r2")
    throw std::invalid_argument("scenario t5 requires parameter r1 or r2");
  if (kind == ScenarioKind::M5 && !(sigma >= 0.0))
    throw std::invalid_argument("scenario M5 requires sigma >= 0");
  if (n_train < 60)
    throw std::invalid_argument("scenario requires n_train >= 60");
  if (replications < 1)
    throw std::invalid_argument("scenario requires at least 1 replication");
  for (double a : alphas)
    if (!(a > 0.0 && a < 1.0))
      throw std::invalid_argument("alpha levels must lie in (0,1)");
}

// ---------------------------------------------------------------------------
// Margins
// ---------------------------------------------------------------------------

ScenarioMargin ScenarioMargin::normal(double mu, double sigma2) {
  ScenarioMargin m;
  m.kind_ = kNormal;
  m.mu_ = mu;
  m.sigma_ = std::sqrt(sigma2);
  return m;
}

ScenarioMargin ScenarioMargin::student(double nu, double mu, double sigma2) {
  ScenarioMargin m;
  m.kind_ = kStudent;
  m.mu_ = mu;
  m.sigma_ = std::sqrt(sigma2);
  m.nu_ = nu;
  return m;
}

ScenarioMargin ScenarioMargin::skewed(const SkewSpec& spec) {
  ScenarioMargin m;
  m.kind_ = kSkew;
  m.skew_ = std::make_shared<SkewDist>(spec);
  return m;
}

double ScenarioMargin::cdf(double x) const {
  switch (kind_) {
    case kNormal: return norm_cdf((x - mu_) / sigma_);
    case kStudent: return t_cdf((x - mu_) / sigma_, nu_);
    case kSkew: return skew_->cdf(x);
  }
  return 0.0;
}

double ScenarioMargin::quantile(double p) const {
  switch (kind_) {
    case kNormal: return mu_ + sigma_ * norm_quantile(p);
    case kStudent: return mu_ + sigma_ * t_quantile(p, nu_);
    case kSkew: return skew_->quantile(p);
  }
  return 0.0;
}

std::vector<ScenarioMargin> scenario_margins(const ScenarioSpec& spec) {
  std::vector<ScenarioMargin> m;
  if (spec.margins == MarginSet::M1) {
    m.push_back(ScenarioMargin::normal(0.0, 1.0));           // Y
    m.push_back(ScenarioMargin::student(4.0, 0.0, 1.0));     // X1
    m.push_back(ScenarioMargin::normal(1.0, 4.0));           // X2
    if (spec.dim_x() >= 4) {
      m.push_back(ScenarioMargin::student(4.0, 0.0, 1.0));   // X3
      m.push_back(ScenarioMargin::normal(1.0, 4.0));         // X4
    }
  } else {
    m.push_back(ScenarioMargin::skewed({SkewKind::SkewT, 0.0, 1.0, 2.0, 4.0}));
    m.push_back(ScenarioMargin::skewed({SkewKind::SkewNormal, -2.0, 0.5, 3.0, 0.0}));
    m.push_back(ScenarioMargin::skewed({SkewKind::SkewT, 1.0, 2.0, 5.0, 3.0}));
    if (spec.dim_x() >= 4) {
      m.push_back(ScenarioMargin::skewed({SkewKind::SkewNormal, -2.0, 0.5, 3.0, 0.0}));
      m.push_back(ScenarioMargin::skewed({SkewKind::SkewT, 1.0, 2.0, 5.0, 3.0}));
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Scenario generation
// ---------------------------------------------------------------------------

namespace {

Matrix t5_correlation(const std::string& r_name) {
  if (r_name == "r2")
    return {{1.00, 0.27, 0.74, 0.72, 0.41},
            {0.27, 1.00, 0.28, 0.29, 0.27},
            {0.74, 0.28, 1.00, 0.74, 0.42},
            {0.72, 0.29, 0.74, 1.00, 0.40},
            {0.41, 0.27, 0.42, 0.40, 1.00}};
  return {{1.0, 0.6, 0.5, 0.5, 0.4},
          {0.6, 1.0, 0.5, 0.5, 0.5},
          {0.5, 0.5, 1.0, 0.5, 0.5},
          {0.5, 0.5, 0.5, 1.0, 0.5},
          {0.4, 0.5, 0.5, 0.5, 1.0}};
}

Matrix m5_covariance() {
  Matrix s(4, std::vector<double>(4));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s[i][j] = std::pow(0.5, std::abs(i - j));
  return s;
}

double m5_surface(std::span<const double> x) {
  return std::sqrt(std::fabs(2.0 * x[0] - x[1] + 0.5)) +
         (-0.5 * x[2] + 1.0) * (0.1 * x[3] * x[3] * x[3]);
}

DataTable make_train_table(std::size_t d) {
  DataTable t;
  t.names.push_back("Y");
  for (std::size_t j = 1; j <= d; ++j) t.names.push_back("X" + std::to_string(j));
  t.cols.assign(d + 1, {});
  return t;
}

double clamp01(double p) { return std::clamp(p, 1e-12, 1.0 - 1e-12); }

}  // namespace

ScenarioData gen_scenario(const ScenarioSpec& spec, std::size_t replication,
                          std::uint64_t seed) {
  spec.validate();
  const std::uint64_t rep_seed = derive_seed(seed, replication);
  const std::size_t d = spec.dim_x();
  const std::size_t n_all = spec.n_train + spec.n_eval();

  ScenarioData out;
  out.train = make_train_table(d);

  if (spec.kind == ScenarioKind::C3) {
    auto margins = scenario_margins(spec);
    const Matrix u = sample_clayton3(spec.delta, n_all, rep_seed);
    for (std::size_t i = 0; i < n_all; ++i) {
      if (i < spec.n_train) {
        out.train.cols[0].push_back(margins[0].quantile(clamp01(u[i][0])));
        out.train.cols[1].push_back(margins[1].quantile(clamp01(u[i][1])));
        out.train.cols[2].push_back(margins[2].quantile(clamp01(u[i][2])));
      } else {
        out.eval_x.push_back({margins[1].quantile(clamp01(u[i][1])),
                              margins[2].quantile(clamp01(u[i][2]))});
      }
    }
    const double delta = spec.delta;
    out.truth = [margins, delta](double alpha, std::span<const double> x) {
      const double v = clamp01(margins[1].cdf(x[0]));
      const double w = clamp01(margins[2].cdf(x[1]));
      return margins[0].quantile(
          clamp01(clayton3_cond_quantile(delta, alpha, v, w)));
    };
    return out;
  }

  if (spec.kind == ScenarioKind::T5) {
    auto margins = scenario_margins(spec);
    const double nu = 3.0;
    MvtSpec mvt{nu, std::vector<double>(5, 0.0), t5_correlation(spec.r_name)};
    const Matrix z = sample_mvt(mvt, n_all, rep_seed);
    for (std::size_t i = 0; i < n_all; ++i) {
      std::vector<double> row(d + 1);
      for (std::size_t j = 0; j <= d; ++j)
        row[j] = margins[j].quantile(clamp01(t_cdf(z[i][j], nu)));
      if (i < spec.n_train)
        for (std::size_t j = 0; j <= d; ++j) out.train.cols[j].push_back(row[j]);
      else
        out.eval_x.push_back({row.begin() + 1, row.end()});
    }
    out.truth = [margins, mvt, nu](double alpha, std::span<const double> x) {
      std::vector<double> zx(x.size());
      for (std::size_t j = 0; j < x.size(); ++j)
        zx[j] = t_quantile(clamp01(margins[j + 1].cdf(x[j])), nu);
      const double zq = t_cond_quantile(mvt, alpha, zx);
      return margins[0].quantile(clamp01(t_cdf(zq, nu)));
    };
    return out;
  }

  // M5
  MvnSpec mvn{std::vector<double>(4, 0.0), m5_covariance()};
  Rng rng(rep_seed);
  const Matrix L = cholesky(mvn.cov);
  std::vector<double> zvec(4), xrow(4);
  const double sigma = spec.sigma;
  for (std::size_t i = 0; i < n_all; ++i) {
    for (int j = 0; j < 4; ++j) zvec[j] = rng.normal();
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k <= j; ++k) s += L[j][k] * zvec[k];
      xrow[j] = s;
    }
    const double eps = rng.normal();
    if (i < spec.n_train) {
      out.train.cols[0].push_back(m5_surface(xrow) + sigma * eps);
      for (int j = 0; j < 4; ++j) out.train.cols[j + 1].push_back(xrow[j]);
    } else {
      out.eval_x.push_back(xrow);
    }
  }
  out.truth = [sigma](double alpha, std::span<const double> x) {
    return m5_surface(x) + sigma * norm_quantile(alpha);
  };
  return out;
}

// ---------------------------------------------------------------------------
// Linear quantile regression (majorize-minimize IRLS)
// ---------------------------------------------------------------------------

double lqr_objective(std::span<const double> beta, const Matrix& x,
                     std::span<const double> y, double alpha) {
  double obj = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double r = y[i] - beta[0];
    for (std::size_t j = 0; j < x[i].size(); ++j) r -= beta[j + 1] * x[i][j];
    obj += r * (alpha - (r < 0.0 ? 1.0 : 0.0));
  }
  return obj;
}

LqrModel lqr_fit(const Matrix& x, std::span<const double> y, double alpha) {
  const std::size_t n = y.size();
  if (x.size() != n) throw std::invalid_argument("lqr_fit: size mismatch");
  const std::size_t d = n ? x[0].size() : 0;
  const std::size_t p = d + 1;
  if (n <= p) throw std::invalid_argument("lqr_fit: need n > d + 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("lqr_fit: alpha must lie in (0,1)");

  auto design = [&](std::size_t i, std::size_t j) {
    return j == 0 ? 1.0 : x[i][j - 1];
  };

  // scale for the initial smoothing parameter
  double ybar = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double yss = 0.0;
  for (double v : y) yss += (v - ybar) * (v - ybar);
  const double yscale = std::sqrt(yss / std::max<std::size_t>(n - 1, 1)) + 1e-12;

  std::vector<double> beta(p, 0.0);
  beta[0] = ybar;
  std::vector<double> r(n);
  auto residuals = [&]() {
    for (std::size_t i = 0; i < n; ++i) {
      double ri = y[i];
      for (std::size_t j = 0; j < p; ++j) ri -= beta[j] * design(i, j);
      r[i] = ri;
    }
  };

  double eps = 0.1 * yscale;
  double prev_obj = lqr_objective(beta, x, y, alpha);
  for (int iter = 0; iter < 200; ++iter) {
    residuals();
    Matrix a(p, std::vector<double>(p, 0.0));
    std::vector<double> b(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = 1.0 / (2.0 * (std::fabs(r[i]) + eps));
      for (std::size_t j = 0; j < p; ++j) {
        const double xj = design(i, j);
        b[j] += w * xj * y[i] + (alpha - 0.5) * xj;
        for (std::size_t k = 0; k <= j; ++k) a[j][k] += w * xj * design(i, k);
      }
    }
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t k = j + 1; k < p; ++k) a[j][k] = a[k][j];
    Matrix L;
    try {
      L = cholesky(a);
    } catch (const NumericError&) {
      throw NumericError("lqr_fit: rank-deficient design matrix");
    }
    beta = chol_solve(L, std::move(b));
    const double obj = lqr_objective(beta, x, y, alpha);
    const bool floored = eps <= 1e-6;
    if (floored && std::fabs(prev_obj - obj) <= 1e-10 * (1.0 + std::fabs(obj)))
      break;
    prev_obj = obj;
    eps = std::max(1e-6, eps * 0.5);
  }
  return LqrModel{std::move(beta), alpha};
}

double lqr_predict(const LqrModel& m, std::span<const double> x) {
  if (x.size() + 1 < m.beta.size())
    throw std::invalid_argument("lqr_predict: covariate vector too short");
  double q = m.beta[0];
  for (std::size_t j = 1; j < m.beta.size(); ++j) q += m.beta[j] * x[j - 1];
  return q;
}

double tick_loss(std::span<const double> y, std::span<const double> q,
                 double alpha) {
  if (y.size() != q.size())
    throw std::invalid_argument("tick_loss: length mismatch");
  if (y.empty()) throw std::invalid_argument("tick_loss: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - q[i];
    s += r * (alpha - (r < 0.0 ? 1.0 : 0.0));
  }
  return s / static_cast<double>(y.size());
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string StudyReport::to_csv(char delimiter) const {
  std::ostringstream os;
  const char d = delimiter;
  os << "scenario" << d << "margins" << d << "parameter" << d << "n_train" << d
     << "alpha" << d << "method" << d << "mise" << d << "rmise" << d
     << "seconds" << d << "failures\n";
  char buf[64];
  for (const auto& r : rows) {
    os << r.scenario << d << r.margins << d << r.parameter << d << r.n_train
       << d;
    std::snprintf(buf, sizeof(buf), "%.10g", r.alpha);
    os << buf << d << r.method << d;
    std::snprintf(buf, sizeof(buf), "%.10g", r.mise);
    os << buf << d;
    std::snprintf(buf, sizeof(buf), "%.10g", r.rmise);
    os << buf << d;
    std::snprintf(buf, sizeof(buf), "%.4f", r.seconds);
    os << buf << d << r.failures << "\n";
  }
  return os.str();
}

std::string StudyReport::to_json() const {
  std::ostringstream os;
  char buf[64];
  os << "{\n  \"rows\": [";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    os << (i ? "," : "") << "\n    {\"scenario\": \"" << r.scenario
       << "\", \"margins\": \"" << r.margins << "\", \"parameter\": \""
       << r.parameter << "\", \"n_train\": " << r.n_train;
    std::snprintf(buf, sizeof(buf), "%.10g", r.alpha);
    os << ", \"alpha\": " << buf << ", \"method\": \"" << r.method << "\"";
    std::snprintf(buf, sizeof(buf), "%.10g", r.mise);
    os << ", \"mise\": " << buf;
    std::snprintf(buf, sizeof(buf), "%.10g", r.rmise);
    os << ", \"rmise\": " << buf;
    std::snprintf(buf, sizeof(buf), "%.4f", r.seconds);
    os << ", \"seconds\": " << buf << ", \"failures\": " << r.failures << "}";
  }
  os << "\n  ]\n}\n";
  return os.str();
}

namespace {

struct MethodAccum {
  double sq_err_sum = 0.0;   // sum over reps of mean squared quantile error
  std::size_t ok_reps = 0;
  std::size_t failures = 0;
  double seconds = 0.0;
};

Matrix covariate_matrix(const DataTable& t, const std::vector<int>& cov_cols) {
  Matrix x(t.nrows(), std::vector<double>(cov_cols.size()));
  for (std::size_t i = 0; i < t.nrows(); ++i)
    for (std::size_t j = 0; j < cov_cols.size(); ++j)
      x[i][j] = t.cols[cov_cols[j]][i];
  return x;
}

}  // namespace

StudyReport run_mise_study(const ScenarioSpec& spec,
                           const std::vector<std::string>& methods,
                           std::uint64_t seed) {
  spec.validate();
  for (const auto& m : methods)
    if (m != "DVQR" && m != "LQR")
      throw std::invalid_argument("run_mise_study: unknown method " + m);

  using Clock = std::chrono::steady_clock;
  // accumulators indexed by [method][alpha]
  std::map<std::string, std::vector<MethodAccum>> acc;
  for (const auto& m : methods)
    acc[m] = std::vector<MethodAccum>(spec.alphas.size());

  for (std::size_t rep = 0; rep < spec.replications; ++rep) {
    const ScenarioData data = gen_scenario(spec, rep, seed);
    const std::size_t ne = data.eval_x.size();
    std::vector<std::vector<double>> truth(spec.alphas.size(),
                                           std::vector<double>(ne));
    for (std::size_t a = 0; a < spec.alphas.size(); ++a)
      for (std::size_t i = 0; i < ne; ++i)
        truth[a][i] = data.truth(spec.alphas[a], data.eval_x[i]);

    std::vector<int> cov_cols;
    for (std::size_t c = 1; c < data.train.ncols(); ++c)
      cov_cols.push_back(static_cast<int>(c));

    for (const auto& method : methods) {
      auto& slots = acc[method];
      const auto t0 = Clock::now();
      try {
        if (method == "DVQR") {
          const QuantRegModel model =
              fit_quantreg(data.train, "Y", FitCriterion::AIC, 0.05);
          for (std::size_t a = 0; a < spec.alphas.size(); ++a) {
            double se = 0.0;
            for (std::size_t i = 0; i < ne; ++i) {
              const double q =
                  predict_quantile(model, spec.alphas[a], data.eval_x[i]);
              se += (q - truth[a][i]) * (q - truth[a][i]);
            }
            slots[a].sq_err_sum += se / static_cast<double>(ne);
            slots[a].ok_reps += 1;
          }
        } else {
          const Matrix x = covariate_matrix(data.train, cov_cols);
          for (std::size_t a = 0; a < spec.alphas.size(); ++a) {
            const LqrModel m = lqr_fit(x, data.train.cols[0], spec.alphas[a]);
            double se = 0.0;
            for (std::size_t i = 0; i < ne; ++i) {
              const double q = lqr_predict(m, data.eval_x[i]);
              se += (q - truth[a][i]) * (q - truth[a][i]);
            }
            slots[a].sq_err_sum += se / static_cast<double>(ne);
            slots[a].ok_reps += 1;
          }
        }
      } catch (const std::exception&) {
        for (auto& s : slots) s.failures += 1;
      }
      const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
      for (auto& s : slots) s.seconds += dt / static_cast<double>(slots.size());
    }
  }

  StudyReport report;
  for (std::size_t a = 0; a < spec.alphas.size(); ++a) {
    double mise_dvqr = 0.0;
    if (acc.count("DVQR") && acc["DVQR"][a].ok_reps > 0)
      mise_dvqr = acc["DVQR"][a].sq_err_sum / acc["DVQR"][a].ok_reps;
    for (const auto& method : methods) {
      const MethodAccum& s = acc[method][a];
      StudyRow row;
      row.scenario = scenario_name(spec.kind);
      row.margins = spec.margins == MarginSet::M1 ? "M1" : "M2";
      row.parameter = spec.parameter_label();
      row.n_train = spec.n_train;
      row.alpha = spec.alphas[a];
      row.method = method;
      row.mise = s.ok_reps ? s.sq_err_sum / s.ok_reps : 0.0;
      row.rmise = (mise_dvqr > 0.0) ? row.mise / mise_dvqr : 1.0;
      row.seconds = s.seconds;
      row.failures = s.failures;
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

StudyReport oos_backtest(const DataTable& data, const std::string& response_col,
                         std::size_t split_index,
                         const std::vector<double>& alphas,
                         const std::vector<std::string>& methods,
                         std::uint64_t seed) {
  (void)seed;  // all fits are deterministic; kept for interface stability
  const int yi = data.col_index(response_col);
  if (yi < 0)
    throw std::invalid_argument("oos_backtest: response column not found");
  const std::size_t n = data.nrows();
  if (split_index < 50 || n - split_index < 50)
    throw std::invalid_argument(
        "oos_backtest: split must leave >= 50 rows on each side");

  DataTable train;
  train.names = data.names;
  train.cols.resize(data.ncols());
  for (std::size_t c = 0; c < data.ncols(); ++c)
    train.cols[c].assign(data.cols[c].begin(),
                         data.cols[c].begin() + split_index);

  std::vector<int> cov_cols;
  for (std::size_t c = 0; c < data.ncols(); ++c)
    if (static_cast<int>(c) != yi) cov_cols.push_back(static_cast<int>(c));

  const std::size_t ne = n - split_index;
  std::vector<double> y_eval(data.cols[yi].begin() + split_index,
                             data.cols[yi].end());
  Matrix x_eval(ne, std::vector<double>(cov_cols.size()));
  for (std::size_t i = 0; i < ne; ++i)
    for (std::size_t j = 0; j < cov_cols.size(); ++j)
      x_eval[i][j] = data.cols[cov_cols[j]][split_index + i];

  using Clock = std::chrono::steady_clock;
  StudyReport report;
  std::map<double, double> dvqr_loss;
  for (const auto& method : methods) {
    const auto t0 = Clock::now();
    std::map<double, double> losses;
    std::size_t failures = 0;
    try {
      if (method == "DVQR") {
        const QuantRegModel model =
            fit_quantreg(train, response_col, FitCriterion::AIC, 0.05);
        for (double a : alphas) {
          std::vector<double> q(ne);
          for (std::size_t i = 0; i < ne; ++i)
            q[i] = predict_quantile(model, a, x_eval[i]);
          losses[a] = tick_loss(y_eval, q, a);
        }
      } else if (method == "LQR") {
        Matrix x_train(split_index, std::vector<double>(cov_cols.size()));
        for (std::size_t i = 0; i < split_index; ++i)
          for (std::size_t j = 0; j < cov_cols.size(); ++j)
            x_train[i][j] = data.cols[cov_cols[j]][i];
        for (double a : alphas) {
          const LqrModel m = lqr_fit(x_train, train.cols[yi], a);
          std::vector<double> q(ne);
          for (std::size_t i = 0; i < ne; ++i)
            q[i] = lqr_predict(m, x_eval[i]);
          losses[a] = tick_loss(y_eval, q, a);
        }
      } else {
        throw std::invalid_argument("oos_backtest: unknown method " + method);
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      failures = 1;
    }
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    if (method == "DVQR") dvqr_loss = losses;
    for (double a : alphas) {
      StudyRow row;
      row.scenario = "oos";
      row.margins = "-";
      row.parameter = response_col;
      row.n_train = split_index;
      row.alpha = a;
      row.method = method;
      row.mise = losses.count(a) ? losses[a] : 0.0;
      row.rmise = (dvqr_loss.count(a) && dvqr_loss[a] > 0.0 && losses.count(a))
                      ? losses[a] / dvqr_loss[a]
                      : 1.0;
      row.seconds = dt / static_cast<double>(alphas.size());
      row.failures = failures;
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace dvqr
