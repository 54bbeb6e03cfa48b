#pragma once

#include "dvqr/dvine.hpp"

namespace dvqr {

/// The deployable predictor: response margin, covariate margins and the
/// fitted regression vine. Margins are retained for every covariate, selected
/// or not. Immutable; prediction is pure.
struct QuantRegModel {
  std::string response_name;
  std::vector<std::string> covariate_names;
  KernelMargin response_margin;
  std::vector<KernelMargin> covariate_margins;
  DVineRegression vine;
};

/// Two-step estimation: kernel-margin PIT, then sequential D-vine selection.
QuantRegModel fit_quantreg(const DataTable& raw, const std::string& response_col,
                           FitCriterion criterion = FitCriterion::AIC,
                           double indep_level = 0.05);

/// q_alpha(x) = F_Y^{-1}( C^{-1}_{V|U}(alpha | F_1(x_1), ..., F_k(x_k)) ).
/// x holds one value per covariate in training order; entries not referenced
/// by vine.order are ignored. With an empty order this is the marginal
/// quantile.
double predict_quantile(const QuantRegModel& m, double alpha,
                        std::span<const double> x);

/// u-scale stress readout: the response's conditional quantile level given
/// covariates pinned at PIT levels kappa (in vine order).
double stress_predict(const QuantRegModel& m, std::span<const double> kappa,
                      double alpha);

}  // namespace dvqr
