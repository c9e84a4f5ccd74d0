#ifndef CORNERKIT_FAMILY_HPP
#define CORNERKIT_FAMILY_HPP

// The diagonal three-function family on R^3:
//   g = diag(tau^2, kappa^2, mu^2),  xi = (1/tau) d1,  eta = tau dx1,
//   phi d2 = (kappa/mu) d3,  phi d3 = -(mu/kappa) d2,  phi d1 = 0.
// It is a corner structure exactly when kappa and mu do not depend on x1.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cornerkit/acms.hpp"
#include "cornerkit/corner.hpp"
#include "cornerkit/expr.hpp"

namespace cornerkit {

class InvalidParams : public std::runtime_error {
 public:
  explicit InvalidParams(const std::string& what) : std::runtime_error(what) {}
};

class UnknownPreset : public std::runtime_error {
 public:
  explicit UnknownPreset(const std::string& name) : std::runtime_error("unknown preset '" + name + "'") {}
};

struct FamilyParams {
  ScalarExpr tau = ScalarExpr::constant(1.0);
  ScalarExpr kappa = ScalarExpr::constant(1.0);
  ScalarExpr mu = ScalarExpr::constant(1.0);
  ChartDomain box;

  static FamilyParams from_strings(const std::string& tau, const std::string& kappa, const std::string& mu,
                                   ChartDomain box = {}) {
    return FamilyParams{parse(tau), parse(kappa), parse(mu), box};
  }
};

/// Throws InvalidParams unless tau > 0 and kappa mu != 0 at every point.
inline void validate(const FamilyParams& params, const std::vector<Point>& pts) {
  for (const Point& p : pts) {
    const double t = params.tau.eval(p);
    const double k = params.kappa.eval(p);
    const double m = params.mu.eval(p);
    if (!(t > 0.0)) throw InvalidParams("tau must be positive; tau = " + std::to_string(t) + " at " + to_string(p));
    if (!(std::fabs(k * m) > 0.0) || !std::isfinite(k * m))
      throw InvalidParams("kappa mu vanishes at " + to_string(p));
  }
}

inline AcmStructure build_family(const FamilyParams& params, const std::string& name = "family") {
  const ScalarExpr zero = ScalarExpr::constant(0.0);
  const ScalarExpr one = ScalarExpr::constant(1.0);
  AcmStructure s;
  s.name = name;
  s.chart = params.box;
  s.phi = {{{zero, zero, zero},
            {zero, zero, -(params.mu / params.kappa)},
            {zero, params.kappa / params.mu, zero}}};
  s.xi = VectorField{{{one / params.tau, zero, zero}}};
  s.eta = OneFormField{{{params.tau, zero, zero}}};
  s.g = MetricField::diagonal(params.tau * params.tau, params.kappa * params.kappa, params.mu * params.mu);
  return s;
}

/// Validates on a sample of the box, then builds.
inline AcmStructure build_family_checked(const FamilyParams& params, std::size_t samples = kDefaultSamples,
                                         std::uint64_t seed = 0, const std::string& name = "family") {
  if (!params.box.valid()) throw InvalidParams("invalid chart box");
  validate(params, params.box.sample(samples, seed));
  return build_family(params, name);
}

struct FamilyCriterion {
  double max_kappa1 = 0.0;  // max |d kappa / dx1|
  double max_mu1 = 0.0;
  double corner_residual = 0.0;
  bool criterion_holds = false;  // kappa_1 = mu_1 = 0 on the sample
  bool corner_holds = false;     // corner residual below the kernel tolerance
  bool agree() const { return criterion_holds == corner_holds; }
};

/// Compares kappa_1 = mu_1 = 0 with the direct corner residual.
inline FamilyCriterion family_corner_criterion(const FamilyParams& params, const std::vector<Point>& pts,
                                               double zero_tol = 1e-6, double corner_tol = 1e-8) {
  FamilyCriterion c;
  for (const Point& p : pts) {
    c.max_kappa1 = std::max(c.max_kappa1, std::fabs(params.kappa.eval_jet2(p).grad[0]));
    c.max_mu1 = std::max(c.max_mu1, std::fabs(params.mu.eval_jet2(p).grad[0]));
  }
  const auto rep = corner_residual(build_family(params), pts, corner_tol);
  c.corner_residual = rep.max("nabla_X xi + eta(X) psi");
  c.criterion_holds = c.max_kappa1 < zero_tol && c.max_mu1 < zero_tol;
  c.corner_holds = rep.issues.empty() && c.corner_residual < corner_tol;
  return c;
}

/// Regression expectations attached to a named preset.
struct PresetExpectation {
  bool corner = false;
  bool thken = false;             // Bar twin is beta-Kenmotsu with beta = e^rho
  bool thcos = false;             // Hat twin is cosymplectic
  bool omega_closed = false;
  std::optional<std::string> beta;  // closed form of the Bar-twin beta, when thken holds
};

struct Preset {
  std::string name;
  FamilyParams params;
  PresetExpectation expected;
};

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"family:A", "family:B", "family:C", "family:D"};
  return names;
}

inline Preset preset(const std::string& name) {
  if (name == "family:A")  // tau = mu = e^{x2}, kappa = 1
    return {name, FamilyParams::from_strings("exp(x2)", "1", "exp(x2)"),
            {true, true, false, true, std::string("tau_2/(tau kappa) = 1")}};
  if (name == "family:B")  // tau = e^{x2}, kappa = mu = 1
    return {name, FamilyParams::from_strings("exp(x2)", "1", "1"), {true, false, true, true, std::nullopt}};
  if (name == "family:C")  // kappa depends on x1: not a corner structure
    return {name, FamilyParams::from_strings("exp(x2)", "exp(x1)", "1"), {false, false, false, true, std::nullopt}};
  if (name == "family:D")  // generic corner: tau = e^{x2+x3}, kappa(x2), mu(x2, x3)
    return {name, FamilyParams::from_strings("exp(x2 + x3)", "1 + x2^2", "1 + x2*x3"),
            {true, false, false, true, std::nullopt}};
  throw UnknownPreset(name);
}

inline AcmStructure preset_structure(const std::string& name) {
  const Preset p = preset(name);
  return build_family(p.params, p.name);
}

} // namespace cornerkit

#endif
