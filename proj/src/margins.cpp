#include "dvqr/margins.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dvqr/stats.hpp"

namespace dvqr {

double kernel_bandwidth(double sigma_robust, std::size_t n) {
  return 1.59 * sigma_robust * std::pow(static_cast<double>(n), -1.0 / 3.0);
}

namespace {

// type-7 (linear interpolation) sample quantile of a sorted vector
double sorted_quantile(const std::vector<double>& s, double p) {
  const std::size_t n = s.size();
  if (n == 1) return s[0];
  const double idx = p * (n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(idx));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double w = idx - lo;
  return (1.0 - w) * s[lo] + w * s[hi];
}

}  // namespace

KernelMargin::KernelMargin(std::vector<double> sample, double bandwidth)
    : sample_(std::move(sample)), h_(bandwidth) {
  if (sample_.empty())
    throw DegenerateMarginError("KernelMargin: empty sample");
  if (!(h_ > 0.0))
    throw DegenerateMarginError("KernelMargin: bandwidth must be positive");
  auto [mn, mx] = std::minmax_element(sample_.begin(), sample_.end());
  lo_ = *mn;
  hi_ = *mx;
}

KernelMargin KernelMargin::fit(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 2)
    throw DegenerateMarginError("fit_kernel_cdf: need at least 2 observations");
  const double mean =
      std::accumulate(sample.begin(), sample.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : sample) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr =
      sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
  double sigma = std::min(sd, iqr / 1.349);
  if (sigma <= 0.0) sigma = sd;  // IQR can vanish on clumped data
  const double scale = std::fabs(mean) + 1.0;
  if (sigma <= 1e-12 * scale)
    throw DegenerateMarginError("fit_kernel_cdf: sample has zero variance");
  return KernelMargin(std::vector<double>(sample.begin(), sample.end()),
                      kernel_bandwidth(sigma, n));
}

double KernelMargin::cdf(double x) const {
  double s = 0.0;
  for (double xi : sample_) s += norm_cdf((x - xi) / h_);
  return s / static_cast<double>(sample_.size());
}

double KernelMargin::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("KernelMargin::quantile: p must lie in (0,1)");
  double a = lo_ - 8.0 * h_;
  double b = hi_ + 8.0 * h_;
  double width = b - a;
  while (cdf(a) > p) {
    a -= width;
    width *= 2.0;
  }
  width = b - a;
  while (cdf(b) < p) {
    b += width;
    width *= 2.0;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid == a || mid == b) break;
    if (cdf(mid) < p)
      a = mid;
    else
      b = mid;
    if (b - a < 1e-14 * (1.0 + std::fabs(mid))) break;
  }
  return 0.5 * (a + b);
}

PitResult pit_transform(const DataTable& raw, const std::string& response_col) {
  const int yi = raw.col_index(response_col);
  if (yi < 0)
    throw std::invalid_argument("pit_transform: response column '" +
                                response_col + "' not found");
  if (raw.nrows() < 2)
    throw std::invalid_argument("pit_transform: need at least 2 rows");

  const std::size_t n = raw.nrows();
  const double clamp_lo = 1.0 / (n + 1.0);
  const double clamp_hi = n / (n + 1.0);
  auto pit_col = [&](const std::vector<double>& col, const KernelMargin& m) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = std::clamp(m.cdf(col[i]), clamp_lo, clamp_hi);
    return out;
  };

  KernelMargin ym = KernelMargin::fit(raw.cols[yi]);
  PitResult res{PseudoData{},      response_col, std::move(ym),
                std::vector<std::string>{}, std::vector<KernelMargin>{}};
  res.data.v = pit_col(raw.cols[yi], res.response_margin);
  for (std::size_t c = 0; c < raw.ncols(); ++c) {
    if (static_cast<int>(c) == yi) continue;
    KernelMargin m = KernelMargin::fit(raw.cols[c]);
    res.data.u.push_back(pit_col(raw.cols[c], m));
    res.data.u_names.push_back(raw.names[c]);
    res.covariate_names.push_back(raw.names[c]);
    res.covariate_margins.push_back(std::move(m));
  }
  return res;
}

}  // namespace dvqr
