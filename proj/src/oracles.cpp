#include "dvqr/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dvqr {

namespace {

struct CondMoments {
  double mu_c;       // conditional mean at x
  double var_base;   // sigma_Y^2 - S_yx S_xx^{-1} S_yx'
  double qform;      // (x - mu_X)' S_xx^{-1} (x - mu_X)
};

CondMoments conditional_moments(const std::vector<double>& mean,
                                const Matrix& cov, std::span<const double> x) {
  const std::size_t d = mean.size() - 1;
  if (x.size() != d)
    throw std::invalid_argument("conditional quantile: x has wrong length");
  Matrix sxx(d, std::vector<double>(d));
  std::vector<double> syx(d), diff(d);
  for (std::size_t i = 0; i < d; ++i) {
    syx[i] = cov[0][i + 1];
    diff[i] = x[i] - mean[i + 1];
    for (std::size_t j = 0; j < d; ++j) sxx[i][j] = cov[i + 1][j + 1];
  }
  const Matrix L = cholesky(sxx);
  const std::vector<double> w = chol_solve(L, syx);     // S_xx^{-1} S_yx'
  const std::vector<double> q = chol_solve(L, diff);    // S_xx^{-1} (x - mu_X)
  CondMoments m{mean[0], cov[0][0], 0.0};
  for (std::size_t i = 0; i < d; ++i) {
    m.mu_c += w[i] * diff[i];
    m.var_base -= w[i] * syx[i];
    m.qform += diff[i] * q[i];
  }
  if (m.var_base <= 0.0)
    throw NumericError("conditional quantile: nonpositive conditional variance");
  return m;
}

}  // namespace

double gaussian_cond_quantile(const MvnSpec& spec, double alpha,
                              std::span<const double> x) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("gaussian_cond_quantile: alpha in (0,1) required");
  if (spec.dim_x() == 0) {
    return spec.mean[0] + std::sqrt(spec.cov[0][0]) * norm_quantile(alpha);
  }
  const CondMoments m = conditional_moments(spec.mean, spec.cov, x);
  return m.mu_c + std::sqrt(m.var_base) * norm_quantile(alpha);
}

double t_cond_quantile(const MvtSpec& spec, double alpha,
                       std::span<const double> x) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("t_cond_quantile: alpha in (0,1) required");
  const double d = static_cast<double>(spec.dim_x());
  if (spec.dim_x() == 0)
    return spec.mean[0] + std::sqrt(spec.cov[0][0]) * t_quantile(alpha, spec.nu);
  const CondMoments m = conditional_moments(spec.mean, spec.cov, x);
  const double nu_c = spec.nu + d;
  const double var_c = (spec.nu + m.qform) / nu_c * m.var_base;
  return m.mu_c + std::sqrt(var_c) * t_quantile(alpha, nu_c);
}

double clayton3_cond_quantile(double delta, double alpha, double v, double w) {
  if (!(delta > 0.0))
    throw std::domain_error("clayton3_cond_quantile: delta must be > 0");
  const double a = std::expm1(-delta / (1.0 + 2.0 * delta) * std::log(alpha));
  const double s = std::exp(-delta * std::log(v)) +
                   std::exp(-delta * std::log(w)) - 1.0;
  return std::exp(-std::log1p(a * s) / delta);
}

double clayton3_cond_cdf(double delta, double u, double v, double w) {
  if (!(delta > 0.0))
    throw std::domain_error("clayton3_cond_cdf: delta must be > 0");
  const double e = (1.0 + 2.0 * delta) / delta;
  const double su = std::exp(-delta * std::log(u)) +
                    std::exp(-delta * std::log(v)) +
                    std::exp(-delta * std::log(w)) - 2.0;
  const double sv = std::exp(-delta * std::log(v)) +
                    std::exp(-delta * std::log(w)) - 1.0;
  return std::exp(-e * std::log(su) + e * std::log(sv));
}

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

Matrix sample_mvn(const MvnSpec& spec, std::size_t n, std::uint64_t seed) {
  const std::size_t p = spec.mean.size();
  const Matrix L = cholesky(spec.cov);
  Rng rng(seed);
  Matrix out(n, std::vector<double>(p));
  std::vector<double> z(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) z[j] = rng.normal();
    for (std::size_t j = 0; j < p; ++j) {
      double s = spec.mean[j];
      for (std::size_t k = 0; k <= j; ++k) s += L[j][k] * z[k];
      out[i][j] = s;
    }
  }
  return out;
}

Matrix sample_mvt(const MvtSpec& spec, std::size_t n, std::uint64_t seed) {
  const std::size_t p = spec.mean.size();
  const Matrix L = cholesky(spec.cov);
  Rng rng(seed);
  Matrix out(n, std::vector<double>(p));
  std::vector<double> z(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) z[j] = rng.normal();
    const double scale = std::sqrt(spec.nu / rng.chisq(spec.nu));
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += L[j][k] * z[k];
      out[i][j] = spec.mean[j] + scale * s;
    }
  }
  return out;
}

Matrix sample_clayton3(double delta, std::size_t n, std::uint64_t seed) {
  if (!(delta > 0.0))
    throw std::domain_error("sample_clayton3: delta must be > 0");
  Rng rng(seed);
  Matrix out(n, std::vector<double>(3));
  for (std::size_t i = 0; i < n; ++i) {
    const double u1 = rng.uniform();
    const double p2 = rng.uniform();
    // bivariate Clayton inverse h-function
    const double t2 = std::expm1(-delta / (1.0 + delta) * std::log(p2));
    const double u2 =
        std::exp(-std::log1p(t2 * std::exp(-delta * std::log(u1))) / delta);
    const double p3 = rng.uniform();
    const double u3 = clayton3_cond_quantile(delta, p3, u1, u2);
    out[i] = {u1, u2, u3};
  }
  return out;
}

std::vector<double> sample_skew(const SkewSpec& spec, std::size_t n,
                                std::uint64_t seed) {
  if (!(spec.sigma2 > 0.0))
    throw std::domain_error("sample_skew: sigma2 must be > 0");
  if (spec.kind == SkewKind::SkewT && !(spec.nu > 0.0))
    throw std::domain_error("sample_skew: nu must be > 0");
  const double del = spec.xi / std::sqrt(1.0 + spec.xi * spec.xi);
  const double sig = std::sqrt(spec.sigma2);
  Rng rng(seed);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w0 = rng.normal();
    const double w1 = rng.normal();
    double z = del * std::fabs(w0) + std::sqrt(1.0 - del * del) * w1;
    if (spec.kind == SkewKind::SkewT) z /= std::sqrt(rng.chisq(spec.nu) / spec.nu);
    out[i] = spec.mu + sig * z;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Skew-normal / skew-t CDF and quantile
// ---------------------------------------------------------------------------

namespace {

// Owen's T(h, a) by quadrature of exp(-h^2(1+t^2)/2)/(1+t^2) on [0, a].
double owen_t(double h, double a) {
  if (a == 0.0) return 0.0;
  const double sign = a > 0.0 ? 1.0 : -1.0;
  const double aa = std::fabs(a);
  auto f = [h](double t) {
    return std::exp(-0.5 * h * h * (1.0 + t * t)) / (1.0 + t * t);
  };
  return sign * integrate_gl(f, 0.0, aa, 64) / (2.0 * std::numbers::pi);
}

}  // namespace

SkewDist::SkewDist(const SkewSpec& spec) : spec_(spec) {
  if (!(spec_.sigma2 > 0.0))
    throw std::domain_error("SkewDist: sigma2 must be > 0");
  if (spec_.kind == SkewKind::SkewT && !(spec_.nu > 0.0))
    throw std::domain_error("SkewDist: nu must be > 0");
}

double SkewDist::std_pdf(double z) const {
  if (spec_.kind == SkewKind::SkewNormal)
    return 2.0 * norm_pdf(z) * norm_cdf(spec_.xi * z);
  const double nu = spec_.nu;
  const double g = spec_.xi * z * std::sqrt((nu + 1.0) / (nu + z * z));
  return 2.0 * t_pdf(z, nu) * t_cdf(g, nu + 1.0);
}

double SkewDist::std_cdf(double z) const {
  if (spec_.kind == SkewKind::SkewNormal)
    return std::clamp(norm_cdf(z) - 2.0 * owen_t(z, spec_.xi), 0.0, 1.0);
  // integrate the density in the t_nu probability scale: the transformed
  // integrand is bounded and smooth, with exact tail mass
  const double nu = spec_.nu;
  const double s_hi = t_cdf(z, nu);
  auto f = [this, nu](double s) {
    const double t = t_quantile(std::clamp(s, 1e-15, 1.0 - 1e-15), nu);
    const double g = spec_.xi * t * std::sqrt((nu + 1.0) / (nu + t * t));
    return 2.0 * t_cdf(g, nu + 1.0);
  };
  double total = 0.0;
  const int panels = 12;
  for (int i = 0; i < panels; ++i) {
    const double a = s_hi * i / panels, b = s_hi * (i + 1) / panels;
    total += integrate_gl(f, a, b, 24);
  }
  return std::clamp(total, 0.0, 1.0);
}

void SkewDist::ensure_table() const {
  if (!zs_.empty()) return;
  // monotone CDF table over a range covering ~1e-9 tail mass
  const int npts = 513;
  const double nu = spec_.nu;
  const double zmax = t_quantile(1.0 - 1e-9, nu) * (2.0 + std::fabs(spec_.xi));
  zs_.resize(npts);
  ps_.resize(npts);
  for (int i = 0; i < npts; ++i) {
    // denser near the center via a cubic stretch
    const double s = -1.0 + 2.0 * i / (npts - 1.0);
    zs_[i] = zmax * s * (0.15 + 0.85 * s * s);
    ps_[i] = std_cdf(zs_[i]);
  }
  for (int i = 1; i < npts; ++i)  // guard monotonicity against quadrature noise
    ps_[i] = std::max(ps_[i], ps_[i - 1]);
}

double SkewDist::pdf(double x) const {
  const double sig = std::sqrt(spec_.sigma2);
  return std_pdf((x - spec_.mu) / sig) / sig;
}

double SkewDist::cdf(double x) const {
  return std_cdf((x - spec_.mu) / std::sqrt(spec_.sigma2));
}

double SkewDist::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("SkewDist::quantile: p must lie in (0,1)");
  const double sig = std::sqrt(spec_.sigma2);
  if (spec_.kind == SkewKind::SkewNormal) {
    const double z = invert_monotone([this](double t) { return std_cdf(t); }, p,
                                     -40.0, 40.0, 1e-13, 1e-13, 200);
    return spec_.mu + sig * z;
  }
  ensure_table();
  // bracket from the table, then Newton with the exact density
  auto it = std::lower_bound(ps_.begin(), ps_.end(), p);
  std::size_t hi = std::min<std::size_t>(ps_.size() - 1,
                                         static_cast<std::size_t>(it - ps_.begin()));
  std::size_t lo = hi > 0 ? hi - 1 : 0;
  double z;
  if (ps_[hi] > ps_[lo])
    z = zs_[lo] + (p - ps_[lo]) / (ps_[hi] - ps_[lo]) * (zs_[hi] - zs_[lo]);
  else
    z = 0.5 * (zs_[lo] + zs_[hi]);
  for (int it2 = 0; it2 < 30; ++it2) {
    const double err = std_cdf(z) - p;
    const double dens = std_pdf(z);
    if (dens <= 0.0) break;
    const double dz = err / dens;
    z -= std::clamp(dz, -1.0, 1.0);
    if (std::fabs(dz) < 1e-11 * (1.0 + std::fabs(z))) break;
  }
  return spec_.mu + sig * z;
}

}  // namespace dvqr
