#pragma once

#include <span>

#include "dvqr/bicop.hpp"

namespace dvqr {

enum class FitCriterion { LL, AIC, BIC };

const char* criterion_name(FitCriterion c);
FitCriterion criterion_from_name(const std::string& name);

/// A fitted pair-copula together with its sample log-likelihood.
struct BiCopFit {
  BiCop cop;
  double loglik = 0.0;
  std::size_t n = 0;
  bool at_boundary = false;           // MLE landed on the parameter box edge
  bool fallback_independence = false; // every candidate fit failed

  int nparams() const { return family_param_count(cop.family); }
  double aic() const { return -2.0 * loglik + 2.0 * nparams(); }
  double bic() const;
};

/// true when `a` beats `b` under the criterion (strictly)
bool fit_better(const BiCopFit& a, const BiCopFit& b, FitCriterion crit);

/// Maximum-likelihood fit of one (family, rotation); initialization by tau
/// inversion, bounded derivative-free optimization inside the parameter box.
BiCopFit fit_bicop_mle(std::span<const std::array<double, 2>> uv, FamilyId f,
                       Rotation r);

/// Genest-Favre asymptotic Kendall-tau independence test: two-sided p-value
/// of |tau|*sqrt(9n(n-1)/(2(2n+5))) against the standard normal.
double indep_test_pvalue(std::span<const std::array<double, 2>> uv);

/// Pair-copula selection: independence pre-test at indep_level, then a fit of
/// every admissible (family, rotation) with the criterion-best returned.
BiCopFit select_bicop(std::span<const std::array<double, 2>> uv,
                      FitCriterion criterion, double indep_level = 0.05);

}  // namespace dvqr
