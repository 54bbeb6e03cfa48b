#pragma once

#include <span>

#include "dvqr/bicop_select.hpp"
#include "dvqr/margins.hpp"

namespace dvqr {

/// A regression D-vine with order V - U_{l1} - ... - U_{lk}.
///
/// Nodes are numbered 0..k along the first-tree path with node 0 = V and node
/// j = U_{order[j-1]}. pairs[t-1][e] is the copula of the tree-t edge joining
/// nodes (e, e+t) given the nodes between them; edge e = 0 of every tree is
/// the pair involving V (the V-spine). Edge copula arguments are ordered
/// (lower node, higher node).
struct DVineRegression {
  std::vector<int> order;                 // covariate indices, distinct
  std::vector<std::vector<BiCop>> pairs;  // pairs[t-1] has k+1-t entries
  FitCriterion criterion = FitCriterion::AIC;
  std::vector<double> cll_path;  // conditional log-lik after each acceptance

  std::size_t ncov() const { return order.size(); }
  /// Total parameter count over all pairs in the vine.
  int nparams() const;
  void check_shape() const;  // throws std::domain_error on malformed layout
};

/// C_{V|U_{l1},...,U_{lk}}(v | u) by the h-function recursion; u is given in
/// vine order (u[j] belongs to covariate order[j]).
double cond_cdf(double v, std::span<const double> u,
                const DVineRegression& vine);

/// Inverse of cond_cdf in its first argument: nested inverse h-functions
/// applied along the V-spine in reverse tree order.
double cond_quantile(double alpha, std::span<const double> u,
                     const DVineRegression& vine);

/// Conditional log-likelihood of the response given the covariates under the
/// vine, optionally AIC/BIC-corrected:
///   LL:  sum_i log c_{V|U}(v_i | u_i)
///   AIC: -2*cll + 2*|theta|     BIC: -2*cll + log(n)*|theta|
/// with |theta| counting the parameters of all pairs in the vine.
double cll(const DVineRegression& vine, const PseudoData& data,
           FitCriterion criterion);

/// Sequential forward selection: step k fits, for every unused covariate, the
/// edges extending the order by that covariate, and accepts the criterion-best
/// candidate; stops when no candidate strictly improves the criterion. Ties
/// break toward the lowest covariate index. Deterministic.
DVineRegression fit_dvine_regression(const PseudoData& data,
                                     FitCriterion criterion,
                                     double indep_level = 0.05);

}  // namespace dvqr
