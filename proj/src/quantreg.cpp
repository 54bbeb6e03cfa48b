#include "dvqr/quantreg.hpp"

#include <algorithm>
#include <cmath>

namespace dvqr {

QuantRegModel fit_quantreg(const DataTable& raw, const std::string& response_col,
                           FitCriterion criterion, double indep_level) {
  PitResult pit = pit_transform(raw, response_col);
  DVineRegression vine = fit_dvine_regression(pit.data, criterion, indep_level);
  return QuantRegModel{pit.response_name, std::move(pit.covariate_names),
                       std::move(pit.response_margin),
                       std::move(pit.covariate_margins), std::move(vine)};
}

double predict_quantile(const QuantRegModel& m, double alpha,
                        std::span<const double> x) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("predict_quantile: alpha must lie in (0,1)");
  if (x.size() < m.covariate_names.size())
    throw std::invalid_argument("predict_quantile: covariate vector too short");
  const std::size_t k = m.vine.ncov();
  std::vector<double> u(k);
  for (std::size_t j = 0; j < k; ++j) {
    const int idx = m.vine.order[j];
    u[j] = m.covariate_margins[idx].cdf(x[idx]);
  }
  const double z = cond_quantile(alpha, u, m.vine);
  return m.response_margin.quantile(std::clamp(z, 1e-10, 1.0 - 1e-10));
}

double stress_predict(const QuantRegModel& m, std::span<const double> kappa,
                      double alpha) {
  for (double k : kappa)
    if (!(k > 0.0 && k < 1.0))
      throw std::domain_error("stress_predict: kappa entries must lie in (0,1)");
  return cond_quantile(alpha, kappa, m.vine);
}

}  // namespace dvqr
