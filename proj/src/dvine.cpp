#include "dvqr/dvine.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace dvqr {

int DVineRegression::nparams() const {
  int k = 0;
  for (const auto& tree : pairs)
    for (const auto& cop : tree) k += family_param_count(cop.family);
  return k;
}

void DVineRegression::check_shape() const {
  const std::size_t k = order.size();
  if (std::set<int>(order.begin(), order.end()).size() != k)
    throw std::domain_error("DVineRegression: duplicate covariate in order");
  if (pairs.size() != k)
    throw std::domain_error("DVineRegression: tree count != order length");
  for (std::size_t t = 0; t < k; ++t)
    if (pairs[t].size() != k - t)
      throw std::domain_error("DVineRegression: wrong edge count in tree");
}

namespace {

constexpr double kEps = 1e-10;

double clamp_prob(double x) { return std::clamp(x, kEps, 1.0 - kEps); }

void check_dims(std::span<const double> u, const DVineRegression& vine) {
  vine.check_shape();
  if (u.size() != vine.order.size()) {
    std::ostringstream msg;
    msg << "conditioning vector has " << u.size() << " entries, vine has "
        << vine.order.size() << " covariates";
    throw std::domain_error(msg.str());
  }
}

// Triangular transform over the covariate sub-path (nodes 1..k): returns
// w[t] = C_{U_{lt} | U_{l1},...,U_{l,t-1}} for t = 1..k, the conditioning
// values consumed by the V-spine inversion.
std::vector<double> spine_conditioners(std::span<const double> u,
                                       const DVineRegression& vine) {
  const std::size_t k = u.size();
  std::vector<double> w(k);
  if (k == 0) return w;
  // a[i]: node i conditioned on the nodes after it (up to current depth);
  // b[i]: node i conditioned on the nodes before it. Nodes 1..k.
  std::vector<double> a(k + 1), b(k + 1);
  for (std::size_t i = 1; i <= k; ++i) a[i] = b[i] = clamp_prob(u[i - 1]);
  w[0] = b[1];
  for (std::size_t t = 1; t < k; ++t) {
    // tree t edges among covariates join nodes (i, i+t), i = 1..k-t
    std::vector<double> na(k + 1), nb(k + 1);
    for (std::size_t i = 1; i + t <= k; ++i) {
      const BiCop& cop = vine.pairs[t - 1][i];
      na[i] = hfunc(cop, CondOn::Second, a[i], b[i + t]);
      nb[i + t] = hfunc(cop, CondOn::First, b[i + t], a[i]);
    }
    a = std::move(na);
    b = std::move(nb);
    w[t] = b[t + 1];  // C_{U_{l,t+1} | U_{l1..lt}}
  }
  return w;
}

}  // namespace

double cond_cdf(double v, std::span<const double> u,
                const DVineRegression& vine) {
  check_dims(u, vine);
  const std::size_t k = u.size();
  double sv = clamp_prob(v);
  if (k == 0) return sv;
  const std::vector<double> w = spine_conditioners(u, vine);
  for (std::size_t t = 1; t <= k; ++t)
    sv = hfunc(vine.pairs[t - 1][0], CondOn::Second, sv, clamp_prob(w[t - 1]));
  return sv;
}

double cond_quantile(double alpha, std::span<const double> u,
                     const DVineRegression& vine) {
  check_dims(u, vine);
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("cond_quantile: alpha must lie in (0,1)");
  const std::size_t k = u.size();
  double z = alpha;
  if (k == 0) return z;
  const std::vector<double> w = spine_conditioners(u, vine);
  for (std::size_t t = k; t >= 1; --t)
    z = hinv(vine.pairs[t - 1][0], CondOn::Second, z, clamp_prob(w[t - 1]));
  return z;
}

double cll(const DVineRegression& vine, const PseudoData& data,
           FitCriterion criterion) {
  vine.check_shape();
  const std::size_t k = vine.order.size();
  for (int idx : vine.order)
    if (idx < 0 || static_cast<std::size_t>(idx) >= data.ncov())
      throw std::domain_error("cll: vine order references a missing column");

  const std::size_t n = data.nobs();
  double ll = 0.0;
  std::vector<double> u(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) u[j] = data.u[vine.order[j]][i];
    // walk the spine, accumulating the V-containing pair densities
    double sv = clamp_prob(data.v[i]);
    const std::vector<double> w = spine_conditioners(u, vine);
    for (std::size_t t = 1; t <= k; ++t) {
      const BiCop& cop = vine.pairs[t - 1][0];
      const double wc = clamp_prob(w[t - 1]);
      ll += bicop_logpdf(cop, sv, wc);
      sv = hfunc(cop, CondOn::Second, sv, wc);
    }
  }
  switch (criterion) {
    case FitCriterion::LL: return ll;
    case FitCriterion::AIC: return -2.0 * ll + 2.0 * vine.nparams();
    case FitCriterion::BIC:
      return -2.0 * ll + std::log(static_cast<double>(n)) * vine.nparams();
  }
  return ll;
}

// ---------------------------------------------------------------------------
// Sequential selection
// ---------------------------------------------------------------------------

namespace {

double model_criterion(double ll, int nparams, std::size_t n,
                       FitCriterion crit) {
  switch (crit) {
    case FitCriterion::LL: return ll;
    case FitCriterion::AIC: return -2.0 * ll + 2.0 * nparams;
    case FitCriterion::BIC:
      return -2.0 * ll + std::log(static_cast<double>(n)) * nparams;
  }
  return ll;
}

bool model_better(double cand, double cur, FitCriterion crit) {
  return crit == FitCriterion::LL ? cand > cur : cand < cur;
}

struct Candidate {
  int index = -1;
  std::vector<BiCop> edges;       // new non-spine edges, tree 1 upward
  BiCop spine;                    // new V-spine pair
  double spine_ll = 0.0;
  int new_params = 0;
  double cll = 0.0;               // candidate model cll (uncorrected)
  double crit = 0.0;              // candidate criterion value
  std::vector<std::vector<double>> fw_next;  // updated forward-to-end values
  std::vector<double> z;          // C_{U_j | U_{l1..lk}} per observation
};

}  // namespace

DVineRegression fit_dvine_regression(const PseudoData& data,
                                     FitCriterion criterion,
                                     double indep_level) {
  const std::size_t n = data.nobs();
  const std::size_t d = data.ncov();
  if (n < 30)
    throw std::invalid_argument("fit_dvine_regression: need n >= 30");
  if (d < 1)
    throw std::invalid_argument("fit_dvine_regression: need at least 1 covariate");
  for (const auto& col : data.u)
    if (col.size() != n)
      throw std::invalid_argument("fit_dvine_regression: ragged pseudo data");

  DVineRegression vine;
  vine.criterion = criterion;

  // cached per-observation transforms for the current model:
  //   sv[i]    = C_{V | U_{l1..lk}}(v_i | .)
  //   fw[p][i] = C_{U_{l,p+1} | U_{l,p+2},...,U_{lk}}   (p = 0..k-1)
  std::vector<double> sv(n);
  for (std::size_t i = 0; i < n; ++i) sv[i] = clamp_prob(data.v[i]);
  std::vector<std::vector<double>> fw;

  double cur_cll = 0.0;
  int cur_params = 0;
  double cur_crit = model_criterion(0.0, 0, n, criterion);
  std::vector<bool> used(d, false);

  for (std::size_t step = 0; step < d; ++step) {
    const std::size_t k = vine.order.size();
    Candidate best;
    bool have_best = false;

    for (std::size_t j = 0; j < d; ++j) {
      if (used[j]) continue;
      Candidate cand;
      cand.index = static_cast<int>(j);
      cand.z.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        cand.z[i] = clamp_prob(data.u[j][i]);
      cand.fw_next.assign(k, std::vector<double>(n));

      // extend the covariate path: edge m joins node p = k-m+1 with the new
      // node, conditioned on the nodes strictly after p
      std::vector<std::array<double, 2>> pairdata(n);
      for (std::size_t m = 1; m <= k; ++m) {
        const std::size_t p = k - m;  // 0-based index into fw
        for (std::size_t i = 0; i < n; ++i)
          pairdata[i] = {fw[p][i], cand.z[i]};
        BiCopFit fit = select_bicop(pairdata, criterion, indep_level);
        for (std::size_t i = 0; i < n; ++i) {
          cand.fw_next[p][i] =
              hfunc(fit.cop, CondOn::Second, fw[p][i], cand.z[i]);
          cand.z[i] = hfunc(fit.cop, CondOn::First, cand.z[i], fw[p][i]);
        }
        cand.new_params += fit.nparams();
        cand.edges.push_back(fit.cop);
      }
      // the new V-spine pair
      for (std::size_t i = 0; i < n; ++i) pairdata[i] = {sv[i], cand.z[i]};
      BiCopFit spine = select_bicop(pairdata, criterion, indep_level);
      cand.spine = spine.cop;
      cand.spine_ll = spine.loglik;
      cand.new_params += spine.nparams();
      cand.cll = cur_cll + spine.loglik;
      cand.crit =
          model_criterion(cand.cll, cur_params + cand.new_params, n, criterion);

      if (!have_best || model_better(cand.crit, best.crit, criterion)) {
        best = std::move(cand);
        have_best = true;
      }
    }

    if (!have_best || !model_better(best.crit, cur_crit, criterion)) break;

    // accept: append the new edges at the end of each tree, open tree k+1
    used[best.index] = true;
    vine.order.push_back(best.index);
    for (std::size_t m = 1; m <= k; ++m)
      vine.pairs[m - 1].push_back(best.edges[m - 1]);
    vine.pairs.push_back({best.spine});
    for (std::size_t p = 0; p < k; ++p) fw[p] = std::move(best.fw_next[p]);
    fw.emplace_back(n);
    for (std::size_t i = 0; i < n; ++i) {
      fw[k][i] = clamp_prob(data.u[best.index][i]);
      sv[i] = hfunc(best.spine, CondOn::Second, sv[i], best.z[i]);
    }
    cur_cll = best.cll;
    cur_params += best.new_params;
    cur_crit = best.crit;
    vine.cll_path.push_back(cur_cll);
  }
  return vine;
}

}  // namespace dvqr
