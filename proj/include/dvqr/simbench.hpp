#pragma once

#include <functional>
#include <memory>

#include "dvqr/oracles.hpp"
#include "dvqr/quantreg.hpp"

namespace dvqr {

enum class ScenarioKind { C3, T5, M5 };
enum class MarginSet { M1, M2 };

ScenarioKind scenario_from_name(const std::string& name);
const char* scenario_name(ScenarioKind k);

/// One simulation-study cell. delta drives C3 (0.86 or 4.67), r_name drives
/// t5 ("r1" or "r2"), sigma drives M5 (0.1 or 1). n_eval = n_train / 2.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::C3;
  MarginSet margins = MarginSet::M1;
  double delta = 0.86;
  std::string r_name = "r1";
  double sigma = 1.0;
  std::size_t n_train = 300;
  std::vector<double> alphas = {0.5};
  std::size_t replications = 10;

  std::size_t n_eval() const { return n_train / 2; }
  std::size_t dim_x() const { return kind == ScenarioKind::C3 ? 2 : 4; }
  std::string parameter_label() const;
  void validate() const;
};

/// Univariate scenario margin (normal / location-scale t / skewed).
class ScenarioMargin {
 public:
  static ScenarioMargin normal(double mu, double sigma2);
  static ScenarioMargin student(double nu, double mu, double sigma2);
  static ScenarioMargin skewed(const SkewSpec& spec);
  double cdf(double x) const;
  double quantile(double p) const;

 private:
  enum { kNormal, kStudent, kSkew } kind_ = kNormal;
  double mu_ = 0.0, sigma_ = 1.0, nu_ = 4.0;
  std::shared_ptr<SkewDist> skew_;  // shared so copies reuse the lazy table
};

/// Margins of (Y, X_1, ..., X_d) for a scenario cell (Table-set M1 or M2).
std::vector<ScenarioMargin> scenario_margins(const ScenarioSpec& spec);

struct ScenarioData {
  DataTable train;                           // "Y", "X1", ..., "Xd"
  std::vector<std::vector<double>> eval_x;   // n_eval rows of covariates
  /// true conditional quantile q_alpha(x)
  std::function<double(double, std::span<const double>)> truth;
};

/// Draw one replication (training set, evaluation covariates, truth handle).
/// Replication streams derive from the master seed and are order-insensitive.
ScenarioData gen_scenario(const ScenarioSpec& spec, std::size_t replication,
                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// Linear quantile regression baseline
// ---------------------------------------------------------------------------

struct LqrModel {
  std::vector<double> beta;  // intercept first
  double alpha = 0.5;
};

/// Check-loss minimization by majorize-minimize IRLS with a smoothing
/// parameter decreasing to 1e-6 (at most 200 iterations).
LqrModel lqr_fit(const Matrix& x, std::span<const double> y, double alpha);
double lqr_predict(const LqrModel& m, std::span<const double> x);
/// sum of check losses at the model's alpha (the quantity lqr_fit minimizes)
double lqr_objective(std::span<const double> beta, const Matrix& x,
                     std::span<const double> y, double alpha);

/// Averaged tick loss (1/n) sum rho_alpha(y_i - q_i).
double tick_loss(std::span<const double> y, std::span<const double> q,
                 double alpha);

// ---------------------------------------------------------------------------
// Study reports
// ---------------------------------------------------------------------------

struct StudyRow {
  std::string scenario;
  std::string margins;
  std::string parameter;
  std::size_t n_train = 0;
  double alpha = 0.5;
  std::string method;
  double mise = 0.0;     // tick loss for out-of-sample rows
  double rmise = 1.0;    // relative to DVQR
  double seconds = 0.0;
  std::size_t failures = 0;
};

struct StudyReport {
  std::vector<StudyRow> rows;
  std::string to_csv(char delimiter = ',') const;
  std::string to_json() const;
};

/// MISE study over the scenario's replications for methods in {DVQR, LQR}.
StudyReport run_mise_study(const ScenarioSpec& spec,
                           const std::vector<std::string>& methods,
                           std::uint64_t seed);

/// Time-split out-of-sample backtest: fit on rows [0, split), evaluate the
/// averaged tick loss of each method on rows [split, n) at each alpha.
StudyReport oos_backtest(const DataTable& data, const std::string& response_col,
                         std::size_t split_index,
                         const std::vector<double>& alphas,
                         const std::vector<std::string>& methods,
                         std::uint64_t seed);

}  // namespace dvqr
