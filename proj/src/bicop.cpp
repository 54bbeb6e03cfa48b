#include "dvqr/bicop.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dvqr {

namespace {

constexpr double kEps = 1e-10;  // argument clamp before family formulas

double clamp_prob(double x) { return std::clamp(x, kEps, 1.0 - kEps); }

// log(e^a + e^b - 1) for a, b >= 0 without overflow in the sum
double log_em1_sum(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m) - std::exp(-m));
}

}  // namespace

int family_param_count(FamilyId f) {
  switch (f) {
    case FamilyId::Independence: return 0;
    case FamilyId::StudentT: return 2;
    default: return 1;
  }
}

const char* family_name(FamilyId f) {
  switch (f) {
    case FamilyId::Independence: return "independence";
    case FamilyId::Gaussian: return "gaussian";
    case FamilyId::StudentT: return "student_t";
    case FamilyId::Clayton: return "clayton";
    case FamilyId::Gumbel: return "gumbel";
    case FamilyId::Frank: return "frank";
    case FamilyId::Joe: return "joe";
  }
  return "?";
}

FamilyId family_from_name(const std::string& name) {
  for (FamilyId f : {FamilyId::Independence, FamilyId::Gaussian,
                     FamilyId::StudentT, FamilyId::Clayton, FamilyId::Gumbel,
                     FamilyId::Frank, FamilyId::Joe})
    if (name == family_name(f)) return f;
  throw std::invalid_argument("unknown copula family name: '" + name + "'");
}

Rotation rotation_from_degrees(int deg) {
  switch (deg) {
    case 0: return Rotation::R0;
    case 90: return Rotation::R90;
    case 180: return Rotation::R180;
    case 270: return Rotation::R270;
  }
  throw std::invalid_argument("rotation must be one of 0/90/180/270");
}

bool family_allows_rotation(FamilyId f) {
  return f == FamilyId::Clayton || f == FamilyId::Gumbel || f == FamilyId::Joe;
}

std::pair<double, double> param_box(FamilyId f, int i) {
  switch (f) {
    case FamilyId::Gaussian: return {-1.0, 1.0};  // open
    case FamilyId::StudentT: return i == 0 ? std::pair{-1.0, 1.0} : std::pair{2.0, 30.0};
    case FamilyId::Clayton: return {0.0, 28.0};   // open at 0
    case FamilyId::Gumbel: return {1.0, 17.0};
    case FamilyId::Frank: return {-35.0, 35.0};   // theta = 0 excluded
    case FamilyId::Joe: return {1.0, 30.0};       // open at 1
    default: return {0.0, 0.0};
  }
}

namespace {

void validate(FamilyId f, Rotation r, const std::vector<double>& p) {
  if (static_cast<int>(p.size()) != family_param_count(f))
    throw std::domain_error(std::string("BiCop: wrong parameter count for ") +
                            family_name(f));
  if (r != Rotation::R0 && !family_allows_rotation(f))
    throw std::domain_error(std::string("BiCop: rotation not admissible for ") +
                            family_name(f));
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]))
      throw std::domain_error("BiCop: non-finite parameter");
    const auto [lo, hi] = param_box(f, static_cast<int>(i));
    bool ok = p[i] >= lo && p[i] <= hi;
    switch (f) {
      case FamilyId::Gaussian:
        ok = p[i] > lo && p[i] < hi;
        break;
      case FamilyId::StudentT:
        if (i == 0) ok = p[i] > lo && p[i] < hi;
        break;
      case FamilyId::Clayton:
        ok = p[i] > 0.0 && p[i] <= hi;
        break;
      case FamilyId::Frank:
        ok = ok && p[i] != 0.0;
        break;
      case FamilyId::Joe:
        ok = p[i] > 1.0 && p[i] <= hi;
        break;
      default:
        break;
    }
    if (!ok) {
      std::ostringstream msg;
      msg << "BiCop: parameter " << p[i] << " outside the " << family_name(f)
          << " box";
      throw std::domain_error(msg.str());
    }
  }
}

// ---------------------------------------------------------------------------
// Unrotated family primitives. Arguments already clamped to [eps, 1-eps].
// All families below are exchangeable, so a single h(u|v) = dC/dv suffices;
// the rotation layer generates the other conditioning direction.
// ---------------------------------------------------------------------------

double gauss_h(double u, double v, double rho) {
  const double x = norm_quantile(u), y = norm_quantile(v);
  return norm_cdf((x - rho * y) / std::sqrt(1.0 - rho * rho));
}

double gauss_hinv(double p, double v, double rho) {
  const double y = norm_quantile(v);
  return norm_cdf(norm_quantile(p) * std::sqrt(1.0 - rho * rho) + rho * y);
}

double gauss_logpdf(double u, double v, double rho) {
  const double x = norm_quantile(u), y = norm_quantile(v);
  const double r2 = rho * rho;
  return -0.5 * std::log1p(-r2) +
         (2.0 * rho * x * y - r2 * (x * x + y * y)) / (2.0 * (1.0 - r2));
}

double t_h(double u, double v, double rho, double nu) {
  const double x = t_quantile(u, nu), y = t_quantile(v, nu);
  const double s = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
  return t_cdf((x - rho * y) / s, nu + 1.0);
}

double t_hinv(double p, double v, double rho, double nu) {
  const double y = t_quantile(v, nu);
  const double s = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
  return t_cdf(t_quantile(p, nu + 1.0) * s + rho * y, nu);
}

double t_logpdf(double u, double v, double rho, double nu) {
  const double x = t_quantile(u, nu), y = t_quantile(v, nu);
  const double r2 = rho * rho;
  const double q = (x * x - 2.0 * rho * x * y + y * y) / (nu * (1.0 - r2));
  return std::lgamma((nu + 2.0) / 2.0) + std::lgamma(nu / 2.0) -
         2.0 * std::lgamma((nu + 1.0) / 2.0) - 0.5 * std::log1p(-r2) -
         (nu + 2.0) / 2.0 * std::log1p(q) +
         (nu + 1.0) / 2.0 * (std::log1p(x * x / nu) + std::log1p(y * y / nu));
}

// numeric t-copula CDF: C(u,v) = int_0^v h(u|t) dt
double t_cdf2(double u, double v, double rho, double nu) {
  const double x = t_quantile(u, nu);
  const double c = (1.0 - rho * rho) / (nu + 1.0);
  auto integrand = [&](double t) {
    const double y = t_quantile(clamp_prob(t), nu);
    return t_cdf((x - rho * y) / std::sqrt((nu + y * y) * c), nu + 1.0);
  };
  return integrate_gl(integrand, 0.0, v, 64);
}

double clayton_cdf(double u, double v, double d) {
  const double ls = log_em1_sum(-d * std::log(u), -d * std::log(v));
  return std::exp(-ls / d);
}

double clayton_h(double u, double v, double d) {
  const double ls = log_em1_sum(-d * std::log(u), -d * std::log(v));
  return std::exp((-d - 1.0) * std::log(v) + (-1.0 / d - 1.0) * ls);
}

double clayton_hinv(double p, double v, double d) {
  // { (p^{-d/(1+d)} - 1) v^{-d} + 1 }^{-1/d}
  const double t = std::expm1(-d / (1.0 + d) * std::log(p));  // p^{-d/(1+d)} - 1
  return std::exp(-std::log1p(t * std::exp(-d * std::log(v))) / d);
}

double clayton_logpdf(double u, double v, double d) {
  const double ls = log_em1_sum(-d * std::log(u), -d * std::log(v));
  return std::log1p(d) - (d + 1.0) * (std::log(u) + std::log(v)) -
         (1.0 / d + 2.0) * ls;
}

double gumbel_cdf(double u, double v, double th) {
  const double lx = std::log(-std::log(u)), ly = std::log(-std::log(v));
  const double s = std::exp(th * lx) + std::exp(th * ly);
  return std::exp(-std::exp(std::log(s) / th));
}

double gumbel_h(double u, double v, double th) {
  const double xt = -std::log(u), yt = -std::log(v);
  const double s = std::pow(xt, th) + std::pow(yt, th);
  const double logs = std::log(s);
  // h = C(u,v) s^{1/th - 1} yt^{th-1} / v
  return std::exp(-std::exp(logs / th) + (1.0 / th - 1.0) * logs +
                  (th - 1.0) * std::log(yt) + yt);
}

double gumbel_logpdf(double u, double v, double th) {
  const double xt = -std::log(u), yt = -std::log(v);
  const double s = std::pow(xt, th) + std::pow(yt, th);
  const double logs = std::log(s);
  const double w = std::exp(logs / th);
  return -w + (th - 1.0) * (std::log(xt) + std::log(yt)) + xt + yt +
         (2.0 / th - 2.0) * logs + std::log1p((th - 1.0) / w);
}

double frank_cdf(double u, double v, double th) {
  const double g1 = std::expm1(-th);
  const double gu = std::expm1(-th * u), gv = std::expm1(-th * v);
  return -std::log1p(gu * gv / g1) / th;
}

double frank_h(double u, double v, double th) {
  const double g1 = std::expm1(-th);
  const double gu = std::expm1(-th * u), gv = std::expm1(-th * v);
  return gu * std::exp(-th * v) / (g1 + gu * gv);
}

double frank_hinv(double p, double v, double th) {
  const double g1 = std::expm1(-th);
  const double gv = std::expm1(-th * v);
  const double gu = p * g1 / (std::exp(-th * v) - p * gv);
  return -std::log1p(gu) / th;
}

double frank_logpdf(double u, double v, double th) {
  const double g1 = std::expm1(-th);
  const double gu = std::expm1(-th * u), gv = std::expm1(-th * v);
  const double den = g1 + gu * gv;
  return std::log(-th * g1) - th * (u + v) - 2.0 * std::log(std::fabs(den));
}

double joe_T(double u, double v, double th) {
  const double xb = 1.0 - u, yb = 1.0 - v;
  const double xp = std::exp(th * std::log(xb)), yp = std::exp(th * std::log(yb));
  return xp + yp - xp * yp;
}

double joe_cdf(double u, double v, double th) {
  return 1.0 - std::exp(std::log(joe_T(u, v, th)) / th);
}

double joe_h(double u, double v, double th) {
  const double xb = 1.0 - u, yb = 1.0 - v;
  const double one_m_xp = -std::expm1(th * std::log(xb));  // 1 - (1-u)^th
  const double T = joe_T(u, v, th);
  return std::exp((1.0 / th - 1.0) * std::log(T) +
                  (th - 1.0) * std::log(yb)) * one_m_xp;
}

double joe_logpdf(double u, double v, double th) {
  const double xb = 1.0 - u, yb = 1.0 - v;
  const double T = joe_T(u, v, th);
  return (th - 1.0) * (std::log(xb) + std::log(yb)) +
         (1.0 / th - 2.0) * std::log(T) + std::log(th - 1.0 + T);
}

// ---------------------------------------------------------------------------
// dispatch over (family, clamped args)
// ---------------------------------------------------------------------------

double base_cdf(const BiCop& c, double u, double v) {
  switch (c.family) {
    case FamilyId::Independence: return u * v;
    case FamilyId::Gaussian:
      return bvn_cdf(norm_quantile(u), norm_quantile(v), c.params[0]);
    case FamilyId::StudentT: return t_cdf2(u, v, c.params[0], c.params[1]);
    case FamilyId::Clayton: return clayton_cdf(u, v, c.params[0]);
    case FamilyId::Gumbel: return gumbel_cdf(u, v, c.params[0]);
    case FamilyId::Frank:
      if (std::fabs(c.params[0]) < 1e-10) return u * v;
      return frank_cdf(u, v, c.params[0]);
    case FamilyId::Joe: return joe_cdf(u, v, c.params[0]);
  }
  return u * v;
}

double base_logpdf(const BiCop& c, double u, double v) {
  switch (c.family) {
    case FamilyId::Independence: return 0.0;
    case FamilyId::Gaussian: return gauss_logpdf(u, v, c.params[0]);
    case FamilyId::StudentT: return t_logpdf(u, v, c.params[0], c.params[1]);
    case FamilyId::Clayton: return clayton_logpdf(u, v, c.params[0]);
    case FamilyId::Gumbel: return gumbel_logpdf(u, v, c.params[0]);
    case FamilyId::Frank:
      if (std::fabs(c.params[0]) < 1e-10) return 0.0;
      return frank_logpdf(u, v, c.params[0]);
    case FamilyId::Joe: return joe_logpdf(u, v, c.params[0]);
  }
  return 0.0;
}

double base_h(const BiCop& c, double u, double v) {
  double h;
  switch (c.family) {
    case FamilyId::Independence: return u;
    case FamilyId::Gaussian: h = gauss_h(u, v, c.params[0]); break;
    case FamilyId::StudentT: h = t_h(u, v, c.params[0], c.params[1]); break;
    case FamilyId::Clayton: h = clayton_h(u, v, c.params[0]); break;
    case FamilyId::Gumbel: h = gumbel_h(u, v, c.params[0]); break;
    case FamilyId::Frank:
      if (std::fabs(c.params[0]) < 1e-10) return u;
      h = frank_h(u, v, c.params[0]);
      break;
    case FamilyId::Joe: h = joe_h(u, v, c.params[0]); break;
    default: return u;
  }
  return std::clamp(h, 0.0, 1.0);
}

double base_hinv(const BiCop& c, double p, double v) {
  double u;
  switch (c.family) {
    case FamilyId::Independence: return p;
    case FamilyId::Gaussian: u = gauss_hinv(p, v, c.params[0]); break;
    case FamilyId::StudentT: u = t_hinv(p, v, c.params[0], c.params[1]); break;
    case FamilyId::Clayton: u = clayton_hinv(p, v, c.params[0]); break;
    case FamilyId::Frank:
      if (std::fabs(c.params[0]) < 1e-10) return p;
      u = frank_hinv(p, v, c.params[0]);
      break;
    case FamilyId::Gumbel:
    case FamilyId::Joe:
      // no closed form: bisection refined by secant on [eps, 1-eps]
      u = invert_monotone([&](double x) { return base_h(c, x, v); }, p, kEps,
                          1.0 - kEps, 1e-10, 1e-12, 100);
      break;
    default: return p;
  }
  return std::clamp(u, 0.0, 1.0);
}

// Rotations are the random-vector transforms (1-U,V), (1-U,1-V), (U,1-V) for
// 90/180/270 degrees; h-functions and inverses follow mechanically.

}  // namespace

BiCop::BiCop(FamilyId f, Rotation r, std::vector<double> p)
    : family(f), rotation(r), params(std::move(p)) {
  validate(family, rotation, params);
}

double bicop_cdf(const BiCop& c, double u, double v) {
  validate(c.family, c.rotation, c.params);
  if (u <= 0.0 || v <= 0.0) return 0.0;
  if (u >= 1.0 && v >= 1.0) return 1.0;
  if (u >= 1.0) return v;
  if (v >= 1.0) return u;
  const double uc = clamp_prob(u), vc = clamp_prob(v);
  double value;
  switch (c.rotation) {
    case Rotation::R0: value = base_cdf(c, uc, vc); break;
    case Rotation::R90: value = vc - base_cdf(c, 1.0 - uc, vc); break;
    case Rotation::R180:
      value = uc + vc - 1.0 + base_cdf(c, 1.0 - uc, 1.0 - vc);
      break;
    case Rotation::R270: value = uc - base_cdf(c, uc, 1.0 - vc); break;
    default: value = base_cdf(c, uc, vc);
  }
  // enforce the Frechet bounds against roundoff
  return std::clamp(value, std::max(u + v - 1.0, 0.0), std::min(u, v));
}

double bicop_logpdf(const BiCop& c, double u, double v) {
  validate(c.family, c.rotation, c.params);
  const double uc = clamp_prob(u), vc = clamp_prob(v);
  switch (c.rotation) {
    case Rotation::R90: return base_logpdf(c, 1.0 - uc, vc);
    case Rotation::R180: return base_logpdf(c, 1.0 - uc, 1.0 - vc);
    case Rotation::R270: return base_logpdf(c, uc, 1.0 - vc);
    default: return base_logpdf(c, uc, vc);
  }
}

double hfunc(const BiCop& c, CondOn cond, double u, double v) {
  validate(c.family, c.rotation, c.params);
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double uc = clamp_prob(u), vc = clamp_prob(v);
  // map the (free, conditioning) pair through the rotation transform
  if (cond == CondOn::Second) {
    switch (c.rotation) {
      case Rotation::R0: return base_h(c, uc, vc);
      case Rotation::R90: return 1.0 - base_h(c, 1.0 - uc, vc);
      case Rotation::R180: return 1.0 - base_h(c, 1.0 - uc, 1.0 - vc);
      case Rotation::R270: return base_h(c, uc, 1.0 - vc);
    }
  } else {
    // exchangeable base families: C_{2|1}(u|v) = base_h with swapped roles
    switch (c.rotation) {
      case Rotation::R0: return base_h(c, uc, vc);
      case Rotation::R90: return base_h(c, uc, 1.0 - vc);
      case Rotation::R180: return 1.0 - base_h(c, 1.0 - uc, 1.0 - vc);
      case Rotation::R270: return 1.0 - base_h(c, 1.0 - uc, vc);
    }
  }
  return uc;
}

double hinv(const BiCop& c, CondOn cond, double p, double v) {
  validate(c.family, c.rotation, c.params);
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  // the level p is NOT clamped: h-values near 0/1 are meaningful and the
  // inverse must reproduce them (only the conditioning value is regularized)
  const double pc = p, vc = clamp_prob(v);
  if (cond == CondOn::Second) {
    switch (c.rotation) {
      case Rotation::R0: return base_hinv(c, pc, vc);
      case Rotation::R90: return 1.0 - base_hinv(c, 1.0 - pc, vc);
      case Rotation::R180: return 1.0 - base_hinv(c, 1.0 - pc, 1.0 - vc);
      case Rotation::R270: return base_hinv(c, pc, 1.0 - vc);
    }
  } else {
    switch (c.rotation) {
      case Rotation::R0: return base_hinv(c, pc, vc);
      case Rotation::R90: return base_hinv(c, pc, 1.0 - vc);
      case Rotation::R180: return 1.0 - base_hinv(c, 1.0 - pc, 1.0 - vc);
      case Rotation::R270: return 1.0 - base_hinv(c, 1.0 - pc, vc);
    }
  }
  return pc;
}

// ---------------------------------------------------------------------------
// Kendall tau links
// ---------------------------------------------------------------------------

namespace {

double debye1(double x) {
  // D1(x) = (1/x) int_0^x t/(e^t - 1) dt, x > 0
  auto f = [](double t) {
    return t < 1e-12 ? 1.0 - t / 2.0 : t / std::expm1(t);
  };
  return integrate_gl(f, 0.0, x, 64) / x;
}

double frank_tau(double th) {
  if (std::fabs(th) < 1e-10) return th / 9.0;
  const double a = std::fabs(th);
  const double tau = 1.0 - 4.0 / a * (1.0 - debye1(a));
  return th > 0.0 ? tau : -tau;
}

double joe_tau(double th) {
  // tau = 1 + 4 int_0^1 phi/phi' dt for the Joe generator; the integrand
  // behaves like t*log(t) near 0, handled by the graded mesh.
  auto g = [th](double t) {
    const double one_m_s = -std::expm1(th * std::log1p(-t));  // 1 - (1-t)^th
    return std::log(one_m_s) * one_m_s /
           (th * std::exp((th - 1.0) * std::log1p(-t)));
  };
  return 1.0 + 4.0 * integrate_graded(g, 0.0, 1.0, 16);
}

double base_tau(FamilyId f, const std::vector<double>& p) {
  switch (f) {
    case FamilyId::Independence: return 0.0;
    case FamilyId::Gaussian:
    case FamilyId::StudentT:
      return 2.0 / std::numbers::pi * std::asin(p[0]);
    case FamilyId::Clayton: return p[0] / (p[0] + 2.0);
    case FamilyId::Gumbel: return 1.0 - 1.0 / p[0];
    case FamilyId::Frank: return frank_tau(p[0]);
    case FamilyId::Joe: return joe_tau(p[0]);
  }
  return 0.0;
}

}  // namespace

double param_to_tau(const BiCop& c) {
  validate(c.family, c.rotation, c.params);
  const double tau = base_tau(c.family, c.params);
  return (c.rotation == Rotation::R90 || c.rotation == Rotation::R270) ? -tau
                                                                       : tau;
}

std::vector<double> tau_to_param(FamilyId f, double tau) {
  switch (f) {
    case FamilyId::Independence:
      if (tau != 0.0)
        throw std::domain_error("tau_to_param: independence requires tau = 0");
      return {};
    case FamilyId::Gaussian:
    case FamilyId::StudentT: {
      if (!(tau >= -1.0 && tau <= 1.0))
        throw std::domain_error("tau_to_param: |tau| > 1");
      double rho = std::sin(std::numbers::pi * tau / 2.0);
      rho = std::clamp(rho, -1.0 + 1e-12, 1.0 - 1e-12);
      if (f == FamilyId::StudentT) return {rho, 10.0};
      return {rho};
    }
    case FamilyId::Clayton: {
      if (!(tau > 0.0))
        throw std::domain_error("tau_to_param: clayton requires tau > 0");
      return {std::clamp(2.0 * tau / (1.0 - tau), 1e-10, 28.0)};
    }
    case FamilyId::Gumbel: {
      if (!(tau >= 0.0))
        throw std::domain_error("tau_to_param: gumbel requires tau >= 0");
      return {std::clamp(1.0 / (1.0 - tau), 1.0, 17.0)};
    }
    case FamilyId::Frank: {
      const double max_tau = frank_tau(35.0);
      if (std::fabs(tau) >= max_tau)
        return {tau > 0.0 ? 35.0 : -35.0};
      if (std::fabs(tau) < 1.2e-10) return {tau >= 0.0 ? 1e-9 : -1e-9};
      const double a = invert_monotone(frank_tau, std::fabs(tau), 1e-9, 35.0,
                                       1e-12, 1e-12, 200);
      return {tau > 0.0 ? a : -a};
    }
    case FamilyId::Joe: {
      if (!(tau > 0.0))
        throw std::domain_error("tau_to_param: joe requires tau > 0");
      if (tau >= joe_tau(30.0)) return {30.0};
      if (tau <= joe_tau(1.0 + 1e-9)) return {1.0 + 1e-9};
      return {invert_monotone(joe_tau, tau, 1.0 + 1e-9, 30.0, 1e-12, 1e-12, 200)};
    }
  }
  throw std::domain_error("tau_to_param: unknown family");
}

std::vector<std::array<double, 2>> sample_bicop(const BiCop& c, std::size_t n,
                                                std::uint64_t seed) {
  validate(c.family, c.rotation, c.params);
  Rng rng(seed);
  std::vector<std::array<double, 2>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = rng.uniform();
    const double w = rng.uniform();
    out[i] = {hinv(c, CondOn::Second, w, v), v};
  }
  return out;
}

}  // namespace dvqr
