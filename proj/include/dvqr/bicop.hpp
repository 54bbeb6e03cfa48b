#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dvqr/stats.hpp"

namespace dvqr {

enum class FamilyId { Independence, Gaussian, StudentT, Clayton, Gumbel, Frank, Joe };

/// Counterclockwise rotation of the copula's mass; 90/180/270 are meaningful
/// only for the asymmetric families (Clayton, Gumbel, Joe).
enum class Rotation { R0 = 0, R90 = 90, R180 = 180, R270 = 270 };

int family_param_count(FamilyId f);
const char* family_name(FamilyId f);
FamilyId family_from_name(const std::string& name);
Rotation rotation_from_degrees(int deg);
bool family_allows_rotation(FamilyId f);

/// Admissible [min, max] box for parameter i of family f.
std::pair<double, double> param_box(FamilyId f, int i);

/// One parametric bivariate pair-copula. Immutable after construction; the
/// constructor validates the parameter vector against the family box.
struct BiCop {
  FamilyId family = FamilyId::Independence;
  Rotation rotation = Rotation::R0;
  std::vector<double> params;

  BiCop() = default;
  BiCop(FamilyId f, Rotation r, std::vector<double> p);
};

/// Which copula argument slot the conditioning value occupies.
enum class CondOn { First, Second };

/// C(u, v), clamped into the Frechet bounds.
double bicop_cdf(const BiCop& c, double u, double v);

/// log c(u, v); arguments are clamped to [1e-10, 1-1e-10] first.
double bicop_logpdf(const BiCop& c, double u, double v);

/// Conditional CDF of the free argument u given the conditioning value v.
/// cond = Second evaluates dC(u,.)/d. at v (i.e. C_{1|2}(u|v)); cond = First
/// puts v in the first slot and returns C_{2|1}(u|v).
double hfunc(const BiCop& c, CondOn cond, double u, double v);

/// Inverse of hfunc in its free argument: hfunc(c, cond, result, v) = p.
double hinv(const BiCop& c, CondOn cond, double p, double v);

/// Kendall's tau implied by the copula (sign flipped under 90/270 rotation).
double param_to_tau(const BiCop& c);

/// Parameters of the *unrotated* family attaining Kendall's tau. Throws
/// std::domain_error when tau is unattainable (e.g. negative tau for Clayton).
std::vector<double> tau_to_param(FamilyId f, double tau);

/// n pairs by conditional inversion: v ~ U(0,1), w ~ U(0,1), u = hinv(w|v).
/// Bit-reproducible for a fixed seed.
std::vector<std::array<double, 2>> sample_bicop(const BiCop& c, std::size_t n,
                                                std::uint64_t seed);

}  // namespace dvqr
