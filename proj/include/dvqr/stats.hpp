#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dvqr {

/// Thrown when an iterative numeric routine fails to converge.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Scalar distributions
// ---------------------------------------------------------------------------

double norm_pdf(double x);
double norm_logpdf(double x);
double norm_cdf(double x);
/// Inverse standard normal CDF (Wichura AS241), p in (0,1).
double norm_quantile(double p);

/// Standard bivariate normal CDF P(X <= x, Y <= y) with correlation rho
/// (Genz's BVND quadrature, abs. error below 5e-16).
double bvn_cdf(double x, double y, double rho);

double t_pdf(double x, double nu);
double t_logpdf(double x, double nu);
double t_cdf(double x, double nu);
double t_quantile(double p, double nu);

// ---------------------------------------------------------------------------
// Quadrature and 1-d solvers
// ---------------------------------------------------------------------------

struct GaussLegendre {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;
};

/// Cached Gauss-Legendre rule of order n.
const GaussLegendre& gauss_legendre(int n);

double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int n = 64);

/// Integrate f over [a, b] on a geometric mesh graded toward a; handles
/// integrable endpoint behavior like t*log(t).
double integrate_graded(const std::function<double(double)>& f, double a,
                        double b, int points_per_panel = 16);

/// Bounded derivative-free minimization (Brent). Returns argmin on [lo, hi].
double brent_minimize(const std::function<double(double)>& f, double lo,
                      double hi, double tol = 1e-10, int max_iter = 200);

/// Solve f(x) = target for monotone f on [lo, hi]: bisection refined by secant
/// steps. Converges in both f-value (ftol) and bracket width (xtol); throws
/// NumericError with diagnostics when max_iter is exhausted.
double invert_monotone(const std::function<double(double)>& f, double target,
                       double lo, double hi, double ftol = 1e-10,
                       double xtol = 1e-13, int max_iter = 100);

// ---------------------------------------------------------------------------
// Rank statistics and small dense linear algebra
// ---------------------------------------------------------------------------

/// Sample Kendall's tau, O(n log n) inversion counting. Assumes continuous
/// data (no tie correction).
double kendall_tau(std::span<const double> x, std::span<const double> y);

using Matrix = std::vector<std::vector<double>>;

/// Lower-triangular Cholesky factor; throws NumericError if not positive
/// definite.
Matrix cholesky(const Matrix& a);

/// Solve (L L') x = b given the lower factor L.
std::vector<double> chol_solve(const Matrix& L, std::vector<double> b);

// ---------------------------------------------------------------------------
// Deterministic RNG
// ---------------------------------------------------------------------------

/// mt19937_64-backed generator; the engine's output sequence is fixed by the
/// standard, and all variate mappings here are explicit, so streams are
/// reproducible bit-for-bit for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape);
  double chisq(double nu);

 private:
  std::mt19937_64 engine_;
};

/// Counter-based seed split: independent per-index streams from one master.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace dvqr
