#include "dvqr/bicop_select.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dvqr {

const char* criterion_name(FitCriterion c) {
  switch (c) {
    case FitCriterion::LL: return "ll";
    case FitCriterion::AIC: return "aic";
    case FitCriterion::BIC: return "bic";
  }
  return "?";
}

FitCriterion criterion_from_name(const std::string& name) {
  if (name == "ll") return FitCriterion::LL;
  if (name == "aic") return FitCriterion::AIC;
  if (name == "bic") return FitCriterion::BIC;
  throw std::invalid_argument("unknown criterion '" + name +
                              "' (expected ll|aic|bic)");
}

double BiCopFit::bic() const {
  return -2.0 * loglik + std::log(static_cast<double>(n)) * nparams();
}

bool fit_better(const BiCopFit& a, const BiCopFit& b, FitCriterion crit) {
  switch (crit) {
    case FitCriterion::LL: return a.loglik > b.loglik;
    case FitCriterion::AIC: return a.aic() < b.aic();
    case FitCriterion::BIC: return a.bic() < b.bic();
  }
  return false;
}

namespace {

double sample_loglik(std::span<const std::array<double, 2>> uv,
                     const BiCop& cop) {
  double ll = 0.0;
  for (const auto& p : uv) ll += bicop_logpdf(cop, p[0], p[1]);
  return ll;
}

bool near_edge(double x, double lo, double hi) {
  const double w = hi - lo;
  return x - lo < 1e-6 * w || hi - x < 1e-6 * w;
}

// search interval inside the box (open ends pulled in)
std::pair<double, double> search_box(FamilyId f, int i) {
  auto [lo, hi] = param_box(f, i);
  switch (f) {
    case FamilyId::Gaussian: return {lo + 1e-5, hi - 1e-5};
    case FamilyId::StudentT:
      return i == 0 ? std::pair{lo + 1e-5, hi - 1e-5} : std::pair{lo, hi};
    case FamilyId::Clayton: return {1e-8, hi};
    case FamilyId::Joe: return {lo + 1e-8, hi};
    default: return {lo, hi};
  }
}

BiCopFit fit_one_param(std::span<const std::array<double, 2>> uv, FamilyId f,
                       Rotation r, double tau_base) {
  const auto [lo, hi] = search_box(f, 0);
  double init = 0.5 * (lo + hi);
  try {
    init = std::clamp(tau_to_param(f, tau_base)[0], lo, hi);
  } catch (const std::domain_error&) {
    // wrong-sign tau: start near the independence end of the box
    if (f == FamilyId::Clayton) init = 1e-3;
    else if (f == FamilyId::Gumbel || f == FamilyId::Joe) init = lo + 1e-3;
  }
  auto nll = [&](double p) {
    return -sample_loglik(uv, BiCop(f, r, {p}));
  };
  double best = brent_minimize(nll, lo, hi, 1e-8, 200);
  if (nll(init) < nll(best)) best = init;
  BiCopFit fit;
  fit.cop = BiCop(f, r, {best});
  fit.loglik = sample_loglik(uv, fit.cop);
  fit.n = uv.size();
  fit.at_boundary = near_edge(best, lo, hi);
  return fit;
}

// Student t: profile over nu with an inner rho search on cached t-scores.
BiCopFit fit_student_t(std::span<const std::array<double, 2>> uv,
                       double tau_base) {
  const std::size_t n = uv.size();
  const double rho0 =
      std::clamp(std::sin(std::numbers::pi * tau_base / 2.0), -0.99, 0.99);
  std::vector<double> x(n), y(n);

  auto profile = [&](double nu, double* rho_out, double rho_tol) {
    const double lg = std::lgamma((nu + 2.0) / 2.0) + std::lgamma(nu / 2.0) -
                      2.0 * std::lgamma((nu + 1.0) / 2.0);
    double marg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = std::clamp(uv[i][0], 1e-10, 1.0 - 1e-10);
      const double v = std::clamp(uv[i][1], 1e-10, 1.0 - 1e-10);
      x[i] = t_quantile(u, nu);
      y[i] = t_quantile(v, nu);
      marg += std::log1p(x[i] * x[i] / nu) + std::log1p(y[i] * y[i] / nu);
    }
    auto nll = [&](double rho) {
      const double r2 = rho * rho;
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double q = (x[i] * x[i] - 2.0 * rho * x[i] * y[i] + y[i] * y[i]) /
                         (nu * (1.0 - r2));
        s += std::log1p(q);
      }
      return -(n * (lg - 0.5 * std::log1p(-r2)) - (nu + 2.0) / 2.0 * s +
               (nu + 1.0) / 2.0 * marg);
    };
    double rho = brent_minimize(nll, -0.99999, 0.99999, rho_tol, 200);
    if (nll(rho0) < nll(rho)) rho = rho0;
    if (rho_out) *rho_out = rho;
    return nll(rho);
  };

  const double nu_hat = brent_minimize(
      [&](double nu) { return profile(nu, nullptr, 1e-5); }, 2.0, 30.0, 5e-3,
      60);
  double rho_hat;
  profile(nu_hat, &rho_hat, 1e-8);

  BiCopFit fit;
  fit.cop = BiCop(FamilyId::StudentT, Rotation::R0, {rho_hat, nu_hat});
  fit.loglik = sample_loglik(uv, fit.cop);
  fit.n = n;
  fit.at_boundary = near_edge(rho_hat, -1.0, 1.0) || near_edge(nu_hat, 2.0, 30.0);
  return fit;
}

}  // namespace

BiCopFit fit_bicop_mle(std::span<const std::array<double, 2>> uv, FamilyId f,
                       Rotation r) {
  if (uv.size() < 10)
    throw std::invalid_argument("fit_bicop_mle: need at least 10 observations");
  if (f == FamilyId::Independence) {
    BiCopFit fit;
    fit.cop = BiCop(FamilyId::Independence, Rotation::R0, {});
    fit.n = uv.size();
    return fit;
  }
  std::vector<double> us(uv.size()), vs(uv.size());
  for (std::size_t i = 0; i < uv.size(); ++i) {
    us[i] = uv[i][0];
    vs[i] = uv[i][1];
  }
  const double tau_hat = kendall_tau(us, vs);
  const bool flipped = (r == Rotation::R90 || r == Rotation::R270);
  const double tau_base = flipped ? -tau_hat : tau_hat;
  if (f == FamilyId::StudentT) return fit_student_t(uv, tau_base);
  return fit_one_param(uv, f, r, tau_base);
}

double indep_test_pvalue(std::span<const std::array<double, 2>> uv) {
  const double n = static_cast<double>(uv.size());
  std::vector<double> us(uv.size()), vs(uv.size());
  for (std::size_t i = 0; i < uv.size(); ++i) {
    us[i] = uv[i][0];
    vs[i] = uv[i][1];
  }
  const double tau = kendall_tau(us, vs);
  const double stat =
      std::fabs(tau) * std::sqrt(9.0 * n * (n - 1.0) / (2.0 * (2.0 * n + 5.0)));
  return 2.0 * (1.0 - norm_cdf(stat));
}

BiCopFit select_bicop(std::span<const std::array<double, 2>> uv,
                      FitCriterion criterion, double indep_level) {
  if (uv.size() < 10)
    throw std::invalid_argument("select_bicop: need at least 10 observations");
  BiCopFit indep;
  indep.cop = BiCop(FamilyId::Independence, Rotation::R0, {});
  indep.n = uv.size();
  if (indep_test_pvalue(uv) >= indep_level) return indep;

  std::vector<double> us(uv.size()), vs(uv.size());
  for (std::size_t i = 0; i < uv.size(); ++i) {
    us[i] = uv[i][0];
    vs[i] = uv[i][1];
  }
  const double tau_hat = kendall_tau(us, vs);

  std::vector<std::pair<FamilyId, Rotation>> candidates = {
      {FamilyId::Gaussian, Rotation::R0},
      {FamilyId::StudentT, Rotation::R0},
      {FamilyId::Frank, Rotation::R0},
  };
  // rotations that can attain the observed tau sign
  for (FamilyId f : {FamilyId::Clayton, FamilyId::Gumbel, FamilyId::Joe}) {
    if (tau_hat >= 0.0) {
      candidates.emplace_back(f, Rotation::R0);
      candidates.emplace_back(f, Rotation::R180);
    } else {
      candidates.emplace_back(f, Rotation::R90);
      candidates.emplace_back(f, Rotation::R270);
    }
  }

  bool have_best = false;
  BiCopFit best;
  for (const auto& [f, r] : candidates) {
    try {
      BiCopFit fit = fit_bicop_mle(uv, f, r);
      if (!std::isfinite(fit.loglik)) continue;
      if (!have_best || fit_better(fit, best, criterion)) {
        best = fit;
        have_best = true;
      }
    } catch (const std::exception&) {
      // failed fits are skipped
    }
  }
  if (!have_best) {
    indep.fallback_independence = true;
    return indep;
  }
  return best;
}

}  // namespace dvqr
