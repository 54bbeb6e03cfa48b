#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dvqr/data.hpp"

namespace dvqr {

/// Raised when a column cannot support a kernel CDF (constant, too short).
struct DegenerateMarginError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Normal-reference bandwidth for CDF smoothing: 1.59 * sigma * n^{-1/3}.
double kernel_bandwidth(double sigma_robust, std::size_t n);

/// Gaussian-kernel smoothed CDF of a stored training sample. Immutable after
/// construction; evaluation is pure.
class KernelMargin {
 public:
  /// Direct construction (used by deserialization). Requires n >= 1, h > 0.
  KernelMargin(std::vector<double> sample, double bandwidth);

  /// Fit from data: bandwidth 1.59 * min(sd, IQR/1.349) * n^{-1/3}.
  static KernelMargin fit(std::span<const double> sample);

  /// (1/n) sum Phi((x - x_i)/h); strictly inside (0,1) for finite x.
  double cdf(double x) const;

  /// Inverse CDF by bisection on [min-8h, max+8h], bracket widened as needed.
  double quantile(double p) const;

  double bandwidth() const { return h_; }
  const std::vector<double>& sample() const { return sample_; }

 private:
  std::vector<double> sample_;
  double h_;
  double lo_, hi_;  // sample range
};

/// Pseudo copula data: PIT-transformed response and covariate columns, all
/// entries clamped into [1/(n+1), n/(n+1)].
struct PseudoData {
  std::vector<double> v;                   // response PITs
  std::vector<std::vector<double>> u;      // one column per covariate
  std::vector<std::string> u_names;

  std::size_t nobs() const { return v.size(); }
  std::size_t ncov() const { return u.size(); }
};

struct PitResult {
  PseudoData data;
  std::string response_name;
  KernelMargin response_margin;
  std::vector<std::string> covariate_names;
  std::vector<KernelMargin> covariate_margins;
};

/// First estimation step: fit one kernel margin per column and transform each
/// training observation through its own column's margin.
PitResult pit_transform(const DataTable& raw, const std::string& response_col);

}  // namespace dvqr
