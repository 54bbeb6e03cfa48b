#include "dvqr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

namespace dvqr {

namespace {
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi); }

double norm_logpdf(double x) { return -0.5 * x * x - 0.5 * std::log(kTwoPi); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

// Wichura's AS241 (PPND16) rational approximations.
double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("norm_quantile: p must lie in (0,1)");
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

// ---------------------------------------------------------------------------
// Genz BVND, following the published bvnl quadrature (node tables as in the
// original TVPACK translation).
// ---------------------------------------------------------------------------
namespace {

// P(X > dh, Y > dk) for standard bivariate normal with correlation r.
double bvn_upper(double dh, double dk, double r) {
  static const double w6[] = {0.1713244923791705, 0.3607615730481384,
                              0.4679139345726904};
  static const double x6[] = {0.9324695142031522, 0.6612093864662647,
                              0.2386191860831970};
  static const double w12[] = {0.04717533638651177, 0.1069393259953183,
                               0.1600783285433464,  0.2031674267230659,
                               0.2334925365383547,  0.2491470458134029};
  static const double x12[] = {0.9815606342467191, 0.9041172563704750,
                               0.7699026741943050, 0.5873179542866171,
                               0.3678314989981802, 0.1252334085114692};
  static const double w20[] = {0.01761400713915212, 0.04060142980038694,
                               0.06267204833410906, 0.08327674157670475,
                               0.1019301198172404,  0.1181945319615184,
                               0.1316886384491766,  0.1420961093183821,
                               0.1491729864726037,  0.1527533871307259};
  static const double x20[] = {0.9931285991850949,  0.9639719272779138,
                               0.9122344282513259,  0.8391169718222188,
                               0.7463319064601508,  0.6360536807265150,
                               0.5108670019508271,  0.3737060887154196,
                               0.2277858511416451,  0.07652652113349733};

  const double* w;
  const double* xn;
  int ng;
  if (std::fabs(r) < 0.3) {
    w = w6; xn = x6; ng = 3;
  } else if (std::fabs(r) < 0.75) {
    w = w12; xn = x12; ng = 6;
  } else {
    w = w20; xn = x20; ng = 10;
  }

  double h = dh, k = dk;
  double hk = h * k;
  double bvn = 0.0;
  if (std::fabs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r) / 2.0;
    for (int i = 0; i < ng; ++i) {
      for (int is = -1; is <= 1; is += 2) {
        const double sn = std::sin(asr * (1.0 + is * xn[i]));
        bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    bvn = bvn * asr / kTwoPi + norm_cdf(-h) * norm_cdf(-k);
  } else {
    if (r < 0.0) {
      k = -k;
      hk = -hk;
    }
    if (std::fabs(r) < 1.0) {
      const double as = (1.0 - r) * (1.0 + r);
      double a = std::sqrt(as);
      const double bs = (h - k) * (h - k);
      const double c = (4.0 - hk) / 8.0;
      const double d = (12.0 - hk) / 80.0;  // canonical d/5 folded in
      const double asr0 = -(bs / as + hk) / 2.0;
      if (asr0 > -100.0)
        bvn = a * std::exp(asr0) *
              (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
      if (-hk < 100.0) {
        const double b = std::sqrt(bs);
        const double sp = std::sqrt(kTwoPi) * norm_cdf(-b / a);
        bvn -= std::exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
      }
      a /= 2.0;
      for (int i = 0; i < ng; ++i) {
        for (int is = -1; is <= 1; is += 2) {
          const double xi = a * (1.0 + is * xn[i]);
          const double xs = xi * xi;
          const double rs = std::sqrt(1.0 - xs);
          const double asr = -(bs / xs + hk) / 2.0;
          if (asr > -100.0) {
            const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
            const double ep = std::exp(-hk * xs / (2.0 * (1.0 + rs) * (1.0 + rs))) / rs;
            bvn += a * w[i] * std::exp(asr) * (ep - sp);
          }
        }
      }
      bvn = -bvn / kTwoPi;
    }
    if (r > 0.0)
      bvn += norm_cdf(-std::max(h, k));
    else
      bvn = -bvn + std::max(0.0, norm_cdf(-h) - norm_cdf(-k));
  }
  return std::clamp(bvn, 0.0, 1.0);
}

}  // namespace

double bvn_cdf(double x, double y, double rho) {
  if (!(rho > -1.0 && rho < 1.0)) {
    // comonotone / countermonotone limits
    if (rho >= 1.0) return norm_cdf(std::min(x, y));
    return std::max(0.0, norm_cdf(x) + norm_cdf(y) - 1.0);
  }
  return bvn_upper(-x, -y, rho);
}

// ---------------------------------------------------------------------------
// Student t (Boost-backed scalars)
// ---------------------------------------------------------------------------

double t_pdf(double x, double nu) { return std::exp(t_logpdf(x, nu)); }

double t_logpdf(double x, double nu) {
  return std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) -
         0.5 * std::log(nu * std::numbers::pi) -
         (nu + 1.0) / 2.0 * std::log1p(x * x / nu);
}

double t_cdf(double x, double nu) {
  boost::math::students_t_distribution<double> dist(nu);
  return boost::math::cdf(dist, x);
}

double t_quantile(double p, double nu) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("t_quantile: p must lie in (0,1)");
  boost::math::students_t_distribution<double> dist(nu);
  return boost::math::quantile(dist, p);
}

// ---------------------------------------------------------------------------
// Gauss-Legendre
// ---------------------------------------------------------------------------

namespace {

GaussLegendre compute_gl(int n) {
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
  static std::map<int, GaussLegendre> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gl(n)).first;
  return it->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int n) {
  const GaussLegendre& rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

double integrate_graded(const std::function<double(double)>& f, double a,
                        double b, int points_per_panel) {
  // Panels [a + L*2^{-k-1}, a + L*2^{-k}] down to width ~1e-14 * L.
  const double len = b - a;
  double total = 0.0;
  double hi = 1.0;
  for (int k = 0; k < 47; ++k) {
    const double lo = hi / 2.0;
    total += integrate_gl(f, a + lo * len, a + hi * len, points_per_panel);
    hi = lo;
  }
  return total;
}

// ---------------------------------------------------------------------------
// 1-d solvers
// ---------------------------------------------------------------------------

double brent_minimize(const std::function<double(double)>& f, double lo,
                      double hi, double tol, int max_iter) {
  const double gold = 0.3819660112501051;
  double a = lo, b = hi;
  double x = a + gold * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double xm = 0.5 * (a + b);
    const double tol1 = tol * std::fabs(x) + 1e-12;
    const double tol2 = 2.0 * tol1;
    if (std::fabs(x - xm) <= tol2 - 0.5 * (b - a)) break;
    bool parabolic = false;
    if (std::fabs(e) > tol1) {
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::fabs(q);
      const double etemp = e;
      e = d;
      if (std::fabs(p) < std::fabs(0.5 * q * etemp) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (xm - x >= 0 ? tol1 : -tol1);
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x >= xm) ? a - x : b - x;
      d = gold * e;
    }
    const double u = (std::fabs(d) >= tol1) ? x + d : x + (d >= 0 ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; w = x; x = u;
      fv = fw; fw = fx; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; w = u; fv = fw; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return x;
}

double invert_monotone(const std::function<double(double)>& f, double target,
                       double lo, double hi, double ftol, double xtol,
                       int max_iter) {
  double flo = f(lo) - target;
  double fhi = f(hi) - target;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  const bool increasing = fhi > flo;
  // Target outside the attainable range: clamp to the nearer endpoint.
  if (increasing ? (flo > 0.0) : (flo < 0.0)) return lo;
  if (increasing ? (fhi < 0.0) : (fhi > 0.0)) return hi;

  double a = lo, b = hi, fa = flo, fb = fhi;
  double x = 0.5 * (a + b);
  for (int iter = 0; iter < max_iter; ++iter) {
    // secant proposal, fall back to bisection when outside the bracket
    double xs = (fb != fa) ? b - fb * (b - a) / (fb - fa) : 0.5 * (a + b);
    if (!(xs > a && xs < b)) xs = 0.5 * (a + b);
    // alternate with pure bisection to guarantee bracket shrinkage
    x = (iter % 2 == 0) ? xs : 0.5 * (a + b);
    const double fx = f(x) - target;
    if (std::fabs(fx) <= ftol && (b - a) <= xtol * (1.0 + std::fabs(x))) return x;
    if ((fx > 0.0) == (fb > 0.0)) {
      b = x; fb = fx;
    } else {
      a = x; fa = fx;
    }
    if ((b - a) <= xtol * (1.0 + std::fabs(x))) return 0.5 * (a + b);
  }
  std::ostringstream msg;
  msg << "invert_monotone: no convergence after " << max_iter
      << " iterations (bracket [" << a << ", " << b << "], target " << target
      << ")";
  throw NumericError(msg.str());
}

// ---------------------------------------------------------------------------
// Kendall's tau via merge-sort inversion counting
// ---------------------------------------------------------------------------

namespace {

std::uint64_t count_inversions(std::vector<double>& v,
                               std::vector<double>& buf, std::size_t lo,
                               std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = (lo + hi) / 2;
  std::uint64_t count =
      count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      count += mid - i;
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
  return count;
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (y.size() != n) throw std::invalid_argument("kendall_tau: length mismatch");
  if (n < 2) throw std::invalid_argument("kendall_tau: need n >= 2");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });
  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  const std::uint64_t inv = count_inversions(ys, buf, 0, n);
  const double total = 0.5 * static_cast<double>(n) * (n - 1);
  return 1.0 - 2.0 * static_cast<double>(inv) / total;
}

// ---------------------------------------------------------------------------
// Cholesky
// ---------------------------------------------------------------------------

Matrix cholesky(const Matrix& a) {
  const std::size_t n = a.size();
  Matrix L(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != n) throw std::invalid_argument("cholesky: not square");
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      if (i == j) {
        if (s <= 0.0)
          throw NumericError("cholesky: matrix not positive definite");
        L[i][i] = std::sqrt(s);
      } else {
        L[i][j] = s / L[j][j];
      }
    }
  }
  return L;
}

std::vector<double> chol_solve(const Matrix& L, std::vector<double> b) {
  const std::size_t n = L.size();
  if (b.size() != n) throw std::invalid_argument("chol_solve: size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= L[i][k] * b[k];
    b[i] /= L[i][i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) b[i] -= L[k][i] * b[k];
    b[i] /= L[i][i];
  }
  return b;
}

// ---------------------------------------------------------------------------
// Rng
// ---------------------------------------------------------------------------

double Rng::uniform() {
  // 53-bit mantissa mapped strictly inside (0,1)
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return norm_quantile(uniform()); }

double Rng::gamma(double shape) {
  if (shape <= 0.0) throw std::domain_error("Rng::gamma: shape must be > 0");
  if (shape < 1.0) {
    const double u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

double Rng::chisq(double nu) { return 2.0 * gamma(nu / 2.0); }

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace dvqr
