#pragma once

// Shared helpers for the test suites.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "dvqr/dvine.hpp"
#include "dvqr/stats.hpp"

namespace testsup {

// Kolmogorov-Smirnov statistic of a sample against a CDF.
inline double ks_statistic(std::vector<double> sample,
                           const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::fabs((i + 1) / n - f));
    d = std::max(d, std::fabs(i / n - f));
  }
  return d;
}

// Partial correlation of (i, j) given the contiguous block [a, b] of indices,
// from a full correlation matrix (recursive peeling of the block's last
// element). An empty block (a > b) returns the plain correlation.
inline double partial_corr(const dvqr::Matrix& r, int i, int j, int a, int b) {
  if (a > b) return r[i][j];
  const double rij = partial_corr(r, i, j, a, b - 1);
  const double rib = partial_corr(r, i, b, a, b - 1);
  const double rjb = partial_corr(r, j, b, a, b - 1);
  return (rij - rib * rjb) / std::sqrt((1.0 - rib * rib) * (1.0 - rjb * rjb));
}

// Gaussian D-vine over path variables 0..m-1 (0 = V) whose pair parameters
// are the partial correlations of the joint correlation matrix r.
inline dvqr::DVineRegression gaussian_vine_from_corr(const dvqr::Matrix& r) {
  const int m = static_cast<int>(r.size());
  dvqr::DVineRegression vine;
  for (int j = 1; j < m; ++j) vine.order.push_back(j - 1);
  for (int t = 1; t < m; ++t) {
    std::vector<dvqr::BiCop> tree;
    for (int e = 0; e + t < m; ++e)
      tree.emplace_back(dvqr::FamilyId::Gaussian, dvqr::Rotation::R0,
                        std::vector<double>{partial_corr(r, e, e + t, e + 1,
                                                         e + t - 1)});
    vine.pairs.push_back(std::move(tree));
  }
  return vine;
}

// Random correlation matrix (positive definite a.s.): R from W W' with
// m x (m+2) standard normal W, rescaled to unit diagonal.
inline dvqr::Matrix random_correlation(int m, std::uint64_t seed) {
  dvqr::Rng rng(seed);
  const int k = m + 2;
  dvqr::Matrix w(m, std::vector<double>(k));
  for (auto& row : w)
    for (auto& x : row) x = rng.normal();
  dvqr::Matrix s(m, std::vector<double>(m, 0.0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int l = 0; l < k; ++l) s[i][j] += w[i][l] * w[j][l];
  dvqr::Matrix r(m, std::vector<double>(m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) r[i][j] = s[i][j] / std::sqrt(s[i][i] * s[j][j]);
  return r;
}

inline double pearson(const std::vector<double>& x,
                      const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace testsup
