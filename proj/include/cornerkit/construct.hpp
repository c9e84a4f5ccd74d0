#ifndef CORNERKIT_CONSTRUCT_HPP
#define CORNERKIT_CONSTRUCT_HPP

// Structures built from the fundamental frame of a corner structure:
// the two twins (cross product with V or with phi V) and the deformation
//   phi~ = phi + theta1 (x) xi,  xi~ = xi,  eta~ = eta - theta2,
//   g~ = f g - f eta (x) eta + eta~ (x) eta~.
// Both are exact first-order jets computed from the base second-order jets.

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cornerkit/acms.hpp"
#include "cornerkit/corner.hpp"
#include "cornerkit/report.hpp"
#include "cornerkit/tensor.hpp"

namespace cornerkit {

// ---------------------------------------------------------------------------
// Twins.

enum class TwinKind { Bar, Hat };

inline std::string to_string(TwinKind k) { return k == TwinKind::Bar ? "bar" : "hat"; }

/// Bar: (phi_bar, V, theta1, g) with phi_bar X = theta2(X) xi - eta(X) phi V.
/// Hat: (phi_hat, phi V, theta2, g) with phi_hat X = eta(X) V - theta1(X) xi.
inline StructureJet<double> twin_jet(const StructureJet<Jet>& s2, TwinKind kind, const Point& p) {
  const FrameJets f = frame_jets(s2, p);
  const StructureJet<double> s1 = truncate(s2);
  StructureJet<double> t;
  t.g = s1.g;
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 3; ++i)
      t.phi[k][i] = kind == TwinKind::Bar ? f.theta2[i] * s1.xi[k] - s1.eta[i] * f.phi_v[k]
                                          : s1.eta[i] * f.v[k] - f.theta1[i] * s1.xi[k];
  t.xi = kind == TwinKind::Bar ? f.v : f.phi_v;
  t.eta = kind == TwinKind::Bar ? f.theta1 : f.theta2;
  return t;
}

/// The twin of a corner structure. Evaluation throws DegenerateCorner where |psi| vanishes.
template <SecondOrderStructure T>
DerivedStructure twin(const T& s, TwinKind kind) {
  DerivedStructure d;
  d.chart = s.domain();
  d.name = s.label() + (kind == TwinKind::Bar ? "/bar" : "/hat");
  d.evaluate = [s, kind](const Point& p) { return twin_jet(s.second_order(p), kind, p); };
  return d;
}

/// Outcome of one twin theorem evaluated two ways: the scalar conditions on
/// (div V, sigma, phiV(rho)) and the classification of the twin itself.
struct TwinTheoremReport {
  TwinKind kind = TwinKind::Bar;
  double div_v_defect = 0.0;  // max |div V - c e^rho|, c = 2 (bar) or 1 (hat)
  double sigma = 0.0;         // max |sigma|
  double phi_v_rho = 0.0;     // max |phiV(rho)|
  bool conditions_hold = false;
  ClassificationReport twin_class;
  double beta_defect = 0.0;  // bar only: max |beta_twin - e^rho|
  bool twin_in_class = false;
  std::vector<PointIssue> issues;

  bool agree() const { return conditions_hold == twin_in_class; }
};

namespace detail {

template <SecondOrderStructure T>
TwinTheoremReport twin_theorem(const T& s, TwinKind kind, const std::vector<Point>& pts, double tol) {
  struct Sample {
    CornerFrame frame;
    std::optional<std::string> issue;
  };
  const auto frames = map_points<Sample>(pts, [&](const Point& p) {
    Sample out;
    try {
      out.frame = corner_frame(s, p);
    } catch (const std::runtime_error& e) {
      out.issue = e.what();
    }
    return out;
  });

  TwinTheoremReport rep;
  rep.kind = kind;
  const double c = kind == TwinKind::Bar ? 2.0 : 1.0;
  std::vector<Point> good;
  std::vector<double> e_rho;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (frames[i].issue) {
      rep.issues.push_back(PointIssue{pts[i], *frames[i].issue});
      continue;
    }
    const CornerFrame& f = frames[i].frame;
    rep.div_v_defect = std::max(rep.div_v_defect, std::fabs(f.div_v - c * f.e_rho));
    rep.sigma = std::max(rep.sigma, std::fabs(f.sigma));
    rep.phi_v_rho = std::max(rep.phi_v_rho, std::fabs(f.phi_v_rho));
    good.push_back(pts[i]);
    e_rho.push_back(f.e_rho);
  }
  if (good.empty()) return rep;
  rep.conditions_hold = rep.div_v_defect < tol && rep.sigma < tol && rep.phi_v_rho < tol;

  rep.twin_class = classify(twin(s, kind), good, tol);
  for (const auto& issue : rep.twin_class.issues) rep.issues.push_back(issue);
  if (kind == TwinKind::Bar) {
    for (std::size_t i = 0; i < rep.twin_class.points.size(); ++i) {
      const std::size_t j = static_cast<std::size_t>(
          std::find(good.begin(), good.end(), rep.twin_class.points[i]) - good.begin());
      rep.beta_defect = std::max(rep.beta_defect, std::fabs(rep.twin_class.beta[i] - e_rho[j]));
    }
    rep.twin_in_class = in_beta_kenmotsu_class(rep.twin_class.verdict) && rep.beta_defect < tol;
  } else {
    rep.twin_in_class = rep.twin_class.verdict == Verdict::Cosymplectic;
  }
  return rep;
}

} // namespace detail

/// Bar twin is beta-Kenmotsu with beta = e^rho iff div V = 2e^rho and sigma = phiV(rho) = 0.
template <SecondOrderStructure T>
TwinTheoremReport thken_check(const T& s, const std::vector<Point>& pts, double tol = 1e-6) {
  return detail::twin_theorem(s, TwinKind::Bar, pts, tol);
}

/// Hat twin is cosymplectic iff div V = e^rho and sigma = phiV(rho) = 0.
template <SecondOrderStructure T>
TwinTheoremReport thcos_check(const T& s, const std::vector<Point>& pts, double tol = 1e-6) {
  return detail::twin_theorem(s, TwinKind::Hat, pts, tol);
}

// ---------------------------------------------------------------------------
// Deformation.

class NonPositiveF : public std::runtime_error {
 public:
  NonPositiveF(double value, const Point& p)
      : std::runtime_error("f = " + std::to_string(value) + " is not positive at " + to_string(p)), at(p) {}
  Point at;
};

struct DeformationParams {
  ScalarExpr f = ScalarExpr::constant(1.0);
};

/// Throws NonPositiveF at the first sampled point where f <= 0.
inline void check_positive(const DeformationParams& params, const std::vector<Point>& pts) {
  for (const Point& p : pts) {
    const double v = params.f.eval(p);
    if (!(v > 0.0)) throw NonPositiveF(v, p);
  }
}

/// Base data needed to deform at one point.
struct DeformationPoint {
  CornerPoint base;
  Jet f;
  StructureJet<double> deformed;
};

inline StructureJet<double> deform_jet(const StructureJet<Jet>& s2, const FrameJets& fr, const Jet& f) {
  const StructureJet<double> s1 = truncate(s2);
  StructureJet<double> t;
  t.xi = s1.xi;
  for (std::size_t i = 0; i < 3; ++i) t.eta[i] = s1.eta[i] - fr.theta2[i];
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 3; ++i) t.phi[k][i] = s1.phi[k][i] + fr.theta1[i] * s1.xi[k];
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      t.g[i][j] = f * s1.g[i][j] - f * s1.eta[i] * s1.eta[j] + t.eta[i] * t.eta[j];
  return t;
}

template <SecondOrderStructure T>
DeformationPoint deformation_point(const T& s, const DeformationParams& params, const Point& p) {
  const Jet f = to_jet(params.f.eval_jet2(p));
  if (!(f.v > 0.0)) throw NonPositiveF(f.v, p);
  CornerPoint cp = corner_point(s, p);
  const StructureJet<Jet> s2 = s.second_order(p);
  StructureJet<double> d = deform_jet(s2, cp.jets, f);
  return DeformationPoint{std::move(cp), f, std::move(d)};
}

/// The deformed structure. Evaluation throws NonPositiveF or DegenerateCorner per point.
template <SecondOrderStructure T>
DerivedStructure deform(const T& s, const DeformationParams& params) {
  DerivedStructure d;
  d.chart = s.domain();
  d.name = s.label() + "/deformed";
  d.evaluate = [s, params](const Point& p) {
    const Jet f = to_jet(params.f.eval_jet2(p));
    if (!(f.v > 0.0)) throw NonPositiveF(f.v, p);
    const StructureJet<Jet> s2 = s.second_order(p);
    return deform_jet(s2, frame_jets(s2, p), f);
  };
  return d;
}

/// Closed form of N~(1)(X, Y):
///   2(1 - sigma e^-rho)(d eta(X,Y) - d eta(phi X, xi) theta2(phi Y) - d eta(xi, phi Y) theta2(phi X)) xi.
inline Vec3<double> ntilde_closed_form(const CornerPoint& cp, const Vec3<double>& x, const Vec3<double>& y) {
  const Geometry1& geo = cp.geo;
  const CornerFrame& f = cp.frame;
  const Mat3<double> deta = exterior_d(geo.jet.eta);
  const Vec3<double> phix = act(geo.phi, x);
  const Vec3<double> phiy = act(geo.phi, y);
  const double bracket_term = eval_form(deta, x, y) - eval_form(deta, phix, geo.xi) * pair(f.theta2, phiy) -
                              eval_form(deta, geo.xi, phiy) * pair(f.theta2, phix);
  return scale(2.0 * (1.0 - f.sigma / f.e_rho) * bracket_term, geo.xi);
}

struct NTildeReport {
  ResidualReport discrepancy;  // |N~(1) brute force - closed form|, g~-norm
  double max_norm = 0.0;       // max |N~(1)(X, Y)| over the probes
  std::size_t probes = 0;
};

/// Compares N~(1) computed from the deformed jets with the closed form over
/// `probes` random (X, Y, p) triples; X, Y have entries in [-1, 1].
template <SecondOrderStructure T>
NTildeReport ntilde_identity_residual(const T& s, const DeformationParams& params, const std::vector<Point>& pts,
                                      std::size_t probes = 200, std::uint64_t seed = 0, double tol = 1e-7) {
  NTildeReport rep;
  rep.probes = probes;
  if (pts.empty() || probes == 0) {
    rep.discrepancy.residuals.push_back(Residual{"N~(1) - closed form", 0.0, std::nullopt, tol});
    return rep;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Point> at(probes);
  std::vector<std::pair<Vec3<double>, Vec3<double>>> xy(probes);
  for (std::size_t i = 0; i < probes; ++i) {
    at[i] = pts[i % pts.size()];
    for (std::size_t k = 0; k < 3; ++k) xy[i].first[k] = unit(rng);
    for (std::size_t k = 0; k < 3; ++k) xy[i].second[k] = unit(rng);
  }
  std::vector<double> norms(probes, 0.0);
  rep.discrepancy = evaluate_residuals({"N~(1) - closed form"}, tol, at, [&](const Point& p) {
    const std::size_t i = static_cast<std::size_t>(&p - at.data());
    const DeformationPoint dp = deformation_point(s, params, p);
    const auto& [x, y] = xy[i];
    const Vec3<double> brute = n1(dp.deformed, constant_field(x), constant_field(y));
    const Vec3<double> closed = ntilde_closed_form(dp.base, x, y);
    const Mat3<double> gt = values(dp.deformed.g);
    norms[i] = norm_g(gt, brute);
    return std::vector<double>{norm_g(gt, brute - closed)};
  });
  for (double n : norms) rep.max_norm = std::max(rep.max_norm, n);
  return rep;
}

/// Residual names of deformed_type, in order.
inline const std::vector<std::string>& deformed_residual_names() {
  static const std::vector<std::string> names{
      "Phi~ - f Phi",
      "d(ln f) ^ Phi~ - xi(ln f) eta~ ^ Phi~",
      "d eta~ - ((1 - sigma e^-rho) d eta + (1/2f)(e^rho - div V) Phi~)",
      "d eta~ - ((1 - sigma e^-rho) d eta - (1/2f)(e^rho - div V) Phi~)",
      "d Phi~ - xi(ln f) eta~ ^ Phi~",
      "alpha(deformed) + (1/2f)(2e^rho - sigma - div V)",
      "beta(deformed) - 1/2 xi(ln f)",
  };
  return names;
}

struct DeformedType {
  std::vector<Point> points;
  std::vector<double> alpha_tilde;  // (1/2f)(e^rho - div V)
  std::vector<double> beta_tilde;   // 1/2 xi(ln f)
  std::vector<double> gate;         // |sigma - e^rho|
  ResidualReport residuals;
  double gate_max = 0.0;
  double gate_min = 0.0;
  bool gate_holds = false;  // sigma = e^rho on every point: the deformed structure is normal
};

/// Per-point scalars and the structure equations of the deformed structure.
struct DeformedSample {
  double alpha = 0.0;
  double beta = 0.0;
  double gate = 0.0;
  std::vector<double> residuals;
};

inline DeformedSample deformed_sample(const DeformationPoint& dp) {
  const CornerFrame& fr = dp.base.frame;
  const Geometry1& geo = dp.base.geo;
  const Geometry1 def(dp.deformed, geo.at);
  const double f = dp.f.v;
  const Vec3<double> dlnf = scale(1.0 / f, Vec3<double>(dp.f.d));
  const double xi_lnf = pair(dlnf, geo.xi);

  DeformedSample out;
  out.alpha = (fr.e_rho - fr.div_v) / (2.0 * f);
  out.beta = 0.5 * xi_lnf;
  out.gate = std::fabs(fr.sigma - fr.e_rho);

  const Mat3<double> phi_form = matmul(geo.g, geo.phi);
  const Mat3<Jet> phit_field = def.fundamental_form_field();
  const Mat3<double> phit = values(phit_field);
  const Mat3<double> deta = exterior_d(geo.jet.eta);
  const Mat3<double> detat = exterior_d(def.jet.eta);
  const double dphit = exterior_d(phit_field);
  const double a = 1.0 - fr.sigma / fr.e_rho;
  const double b = (fr.e_rho - fr.div_v) / (2.0 * f);

  // 2-forms are measured on a g~-orthonormal frame, 3-forms on an oriented one.
  const auto frame = orthonormal_frame(def.g);
  const auto norm2 = [&](const Mat3<double>& form) {
    double m = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j) m = std::max(m, std::fabs(eval_form(form, frame[i], frame[j])));
    return m;
  };
  const double vol = 1.0 / std::sqrt(det(def.g));
  const double lemma = wedge(dlnf, phit) - xi_lnf * wedge(def.eta, phit);
  const double dphi_eq = dphit - xi_lnf * wedge(def.eta, phit);
  const OlszakPair own = olszak_alpha_beta(def);

  out.residuals = {
      norm2(combine({{1.0, phit}, {-f, phi_form}})),
      std::fabs(lemma) * vol,
      norm2(combine({{1.0, detat}, {-a, deta}, {-b, phit}})),
      norm2(combine({{1.0, detat}, {-a, deta}, {b, phit}})),
      std::fabs(dphi_eq) * vol,
      std::fabs(own.alpha + (2.0 * fr.e_rho - fr.sigma - fr.div_v) / (2.0 * f)),
      std::fabs(own.beta - out.beta),
  };
  return out;
}

/// Scalars (alpha~, beta~) of the deformed structure and its structure equations.
template <SecondOrderStructure T>
DeformedType deformed_type(const T& s, const DeformationParams& params, const std::vector<Point>& pts,
                           double tol = 1e-7, double gate_tol = 1e-6) {
  struct Sample {
    DeformedSample d;
    std::optional<std::string> issue;
  };
  const auto samples = detail::map_points<Sample>(pts, [&](const Point& p) {
    Sample out;
    try {
      out.d = deformed_sample(deformation_point(s, params, p));
    } catch (const std::runtime_error& e) {
      out.issue = e.what();
    }
    return out;
  });

  DeformedType dt;
  const std::vector<double> tols{1e-9, 1e-8, tol, tol, tol, tol, tol};
  dt.residuals = evaluate_residuals(deformed_residual_names(), tols, pts, [&](const Point& p) {
    const std::size_t i = static_cast<std::size_t>(&p - pts.data());
    if (samples[i].issue) throw std::runtime_error(*samples[i].issue);
    return samples[i].d.residuals;
  });
  dt.gate_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (samples[i].issue) continue;
    dt.points.push_back(pts[i]);
    dt.alpha_tilde.push_back(samples[i].d.alpha);
    dt.beta_tilde.push_back(samples[i].d.beta);
    dt.gate.push_back(samples[i].d.gate);
    dt.gate_max = std::max(dt.gate_max, samples[i].d.gate);
    dt.gate_min = std::min(dt.gate_min, samples[i].d.gate);
  }
  if (dt.points.empty()) dt.gate_min = 0.0;
  dt.gate_holds = !dt.points.empty() && dt.gate_max < gate_tol;
  return dt;
}

// ---------------------------------------------------------------------------
// Type of a normal deformed structure.

enum class CorollaryCase { Sasakian, Kenmotsu, Cosymplectic, NoCase, GateFailed };

inline std::string to_string(CorollaryCase c) {
  switch (c) {
    case CorollaryCase::Sasakian: return "sasakian";
    case CorollaryCase::Kenmotsu: return "kenmotsu";
    case CorollaryCase::Cosymplectic: return "cosymplectic";
    case CorollaryCase::NoCase: return "trans-sasakian";
    case CorollaryCase::GateFailed: return "gate-failed";
  }
  return "?";
}

/// Pointwise inputs of the case analysis.
struct CorollaryScalars {
  double sigma = 0.0;
  double e_rho = 1.0;
  double div_v = 0.0;
  double f = 1.0;
  double xi_f = 0.0;  // xi(f)
};

/// Sasakian: div V = e^rho - 2f, xi(f) = 0. Kenmotsu: div V = e^rho, xi(f) = 2f.
/// Cosymplectic: div V = e^rho, xi(f) = 0. Requires sigma = e^rho.
inline CorollaryCase corollary_case(const CorollaryScalars& c, double tol = 1e-6) {
  const auto zero = [tol](double v) { return std::fabs(v) < tol; };
  if (!zero(c.sigma - c.e_rho)) return CorollaryCase::GateFailed;
  if (zero(c.div_v - (c.e_rho - 2.0 * c.f)) && zero(c.xi_f)) return CorollaryCase::Sasakian;
  if (zero(c.div_v - c.e_rho) && zero(c.xi_f - 2.0 * c.f)) return CorollaryCase::Kenmotsu;
  if (zero(c.div_v - c.e_rho) && zero(c.xi_f)) return CorollaryCase::Cosymplectic;
  return CorollaryCase::NoCase;
}

struct CorollaryReport {
  CorollaryCase verdict = CorollaryCase::GateFailed;
  double gate_max = 0.0;  // max |sigma - e^rho|
  double gate_min = 0.0;
  double gate_mean = 0.0;
  std::vector<PointIssue> issues;
};

/// The case shared by every sampled point, or NoCase when they disagree.
template <SecondOrderStructure T>
CorollaryReport corollary_gate(const T& s, const DeformationParams& params, const std::vector<Point>& pts,
                               double tol = 1e-6) {
  struct Sample {
    CorollaryScalars c;
    std::optional<std::string> issue;
  };
  const auto samples = detail::map_points<Sample>(pts, [&](const Point& p) {
    Sample out;
    try {
      const Jet f = to_jet(params.f.eval_jet2(p));
      if (!(f.v > 0.0)) throw NonPositiveF(f.v, p);
      const CornerPoint cp = corner_point(s, p);
      out.c = {cp.frame.sigma, cp.frame.e_rho, cp.frame.div_v, f.v, directional(cp.geo.xi, f)};
    } catch (const std::runtime_error& e) {
      out.issue = e.what();
    }
    return out;
  });

  CorollaryReport rep;
  std::vector<double> gaps;
  std::optional<CorollaryCase> shared;
  bool consistent = true;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (samples[i].issue) {
      rep.issues.push_back(PointIssue{pts[i], *samples[i].issue});
      continue;
    }
    const CorollaryScalars& c = samples[i].c;
    gaps.push_back(std::fabs(c.sigma - c.e_rho));
    const CorollaryCase k = corollary_case(c, tol);
    if (!shared) shared = k;
    else if (*shared != k) consistent = false;
  }
  if (gaps.empty()) return rep;
  rep.gate_max = *std::max_element(gaps.begin(), gaps.end());
  rep.gate_min = *std::min_element(gaps.begin(), gaps.end());
  rep.gate_mean = mean_stddev(gaps).first;
  if (rep.gate_max >= tol) rep.verdict = CorollaryCase::GateFailed;
  else rep.verdict = consistent ? *shared : CorollaryCase::NoCase;
  return rep;
}

} // namespace cornerkit

#endif
