#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "dvqr/stats.hpp"

namespace dvqr {

/// Joint normal for (Y, X_1, ..., X_d): mean and covariance with the response
/// in the first coordinate.
struct MvnSpec {
  std::vector<double> mean;
  Matrix cov;
  std::size_t dim_x() const { return mean.size() - 1; }
};

/// Multivariate t with nu degrees of freedom (cov is the scale matrix).
struct MvtSpec {
  double nu = 3.0;
  std::vector<double> mean;
  Matrix cov;
  std::size_t dim_x() const { return mean.size() - 1; }
};

enum class SkewKind { SkewNormal, SkewT };

/// Azzalini direct parameterization: location mu, scale^2 sigma2, shape xi;
/// nu applies to skew-t only.
struct SkewSpec {
  SkewKind kind = SkewKind::SkewNormal;
  double mu = 0.0;
  double sigma2 = 1.0;
  double xi = 0.0;
  double nu = 4.0;
};

/// Conditional quantile of Y | X = x under the joint normal:
/// mu_c(x) = mu_Y + S_yx S_xx^{-1} (x - mu_X), sigma_c^2 = s_Y^2 - S_yx S_xx^{-1} S_yx'.
double gaussian_cond_quantile(const MvnSpec& spec, double alpha,
                              std::span<const double> x);

/// Conditional quantile of Y | X = x under the joint t: nu_c = nu + d and the
/// x-dependent scale (nu + (x-mu)'S_xx^{-1}(x-mu)) / (nu + d) * sigma_c^2.
double t_cond_quantile(const MvtSpec& spec, double alpha,
                       std::span<const double> x);

/// Closed-form conditional quantile of the trivariate Clayton copula:
/// { (alpha^{-d/(1+2d)} - 1)(v^{-d} + w^{-d} - 1) + 1 }^{-1/d}.
double clayton3_cond_quantile(double delta, double alpha, double v, double w);

/// The matching conditional CDF C_{U|V,W}(u|v,w) (used as the inverse check).
double clayton3_cond_cdf(double delta, double u, double v, double w);

/// Samplers (rows are observations; deterministic per seed).
Matrix sample_mvn(const MvnSpec& spec, std::size_t n, std::uint64_t seed);
Matrix sample_mvt(const MvtSpec& spec, std::size_t n, std::uint64_t seed);
/// Trivariate Clayton on the copula scale via conditional inversion.
Matrix sample_clayton3(double delta, std::size_t n, std::uint64_t seed);

std::vector<double> sample_skew(const SkewSpec& spec, std::size_t n,
                                std::uint64_t seed);

/// CDF/quantile/density of the skew-normal / skew-t laws (CDF by quadrature;
/// the skew-t caches a monotone table refined by a density Newton step).
class SkewDist {
 public:
  explicit SkewDist(const SkewSpec& spec);
  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double p) const;
  const SkewSpec& spec() const { return spec_; }

 private:
  double std_cdf(double z) const;  // standardized (mu=0, sigma=1)
  double std_pdf(double z) const;
  void ensure_table() const;

  SkewSpec spec_;
  mutable std::vector<double> zs_, ps_;  // lazy monotone CDF table (skew-t)
};

}  // namespace dvqr
