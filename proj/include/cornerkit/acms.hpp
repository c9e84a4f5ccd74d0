#ifndef CORNERKIT_ACMS_HPP
#define CORNERKIT_ACMS_HPP

// Almost contact metric structures (phi, xi, eta, g) on a chart: axioms,
// fundamental 2-form, Nijenhuis-type tensors, Olszak functions, the
// trans-Sasakian residual and the 3D normal-class classification.

#include <array>
#include <cmath>
#include <concepts>
#include <functional>
#include <optional>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "cornerkit/dual.hpp"
#include "cornerkit/expr.hpp"
#include "cornerkit/report.hpp"
#include "cornerkit/tensor.hpp"

namespace cornerkit {

/// Jets of the four structure tensors at one point. Entries are Dual<S>:
/// S = double gives first-order data, S = Jet second-order data.
template <class S>
struct StructureJet {
  Mat3<Dual<S>> phi;  // phi[k][i] = (phi d_i)^k
  Vec3<Dual<S>> xi;
  Vec3<Dual<S>> eta;
  Mat3<Dual<S>> g;
};

inline StructureJet<double> truncate(const StructureJet<Jet>& s) {
  return {truncate(s.phi), truncate(s.xi), truncate(s.eta), truncate(s.g)};
}

/// Structure defined by expressions; carries second-order jets.
struct AcmStructure {
  Mat3<ScalarExpr> phi;
  VectorField xi;
  OneFormField eta;
  MetricField g;
  ChartDomain chart;
  std::string name = "structure";

  template <class S>
  StructureJet<S> jet(const Point& p) const {
    using T = Dual<S>;
    StructureJet<S> r;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) r.phi[i][j] = lift<T>(phi[i][j].eval_jet2(p));
    r.xi = xi.jet<T>(p);
    r.eta = eta.jet<T>(p);
    r.g = g.jet<T>(p);
    return r;
  }

  StructureJet<double> first_order(const Point& p) const { return jet<double>(p); }
  StructureJet<Jet> second_order(const Point& p) const { return jet<Jet>(p); }
  const ChartDomain& domain() const { return chart; }
  const std::string& label() const { return name; }
};

/// Structure known only through its first-order jets (twins, deformations).
struct DerivedStructure {
  std::function<StructureJet<double>(const Point&)> evaluate;
  ChartDomain chart;
  std::string name = "derived";

  StructureJet<double> first_order(const Point& p) const { return evaluate(p); }
  const ChartDomain& domain() const { return chart; }
  const std::string& label() const { return name; }
};

template <class T>
concept FirstOrderStructure = requires(const T& s, const Point& p) {
  { s.first_order(p) } -> std::same_as<StructureJet<double>>;
  { s.domain() } -> std::convertible_to<const ChartDomain&>;
};

template <class T>
concept SecondOrderStructure = FirstOrderStructure<T> && requires(const T& s, const Point& p) {
  { s.second_order(p) } -> std::same_as<StructureJet<Jet>>;
};

/// Values and Christoffel symbols of a structure jet at one point.
template <class S>
struct Geometry {
  StructureJet<S> jet;
  Mat3<S> phi;
  Vec3<S> xi;
  Vec3<S> eta;
  Mat3<S> g;
  Gamma<S> gamma;
  Point at;

  Geometry(StructureJet<S> s, const Point& p)
      : jet(std::move(s)), phi(values(jet.phi)), xi(values(jet.xi)), eta(values(jet.eta)),
        g(values(jet.g)), at(p) {
    Mat3<double> gp;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) gp[i][j] = primal(g[i][j]);
    check_metric(gp, p);
    gamma = christoffel(jet.g);
  }

  /// nabla_X xi
  Vec3<S> nabla_xi(const Vec3<S>& x) const { return covariant(gamma, x, jet.xi); }
  /// psi = -nabla_xi xi
  Vec3<S> psi() const { return -nabla_xi(xi); }
  /// Fundamental 2-form as a field, Phi_ij = g(d_i, phi d_j).
  Mat3<Dual<S>> fundamental_form_field() const { return matmul(jet.g, jet.phi); }
};

using Geometry1 = Geometry<double>;

template <FirstOrderStructure T>
Geometry1 geometry(const T& s, const Point& p) {
  return Geometry1(s.first_order(p), p);
}

inline const std::array<Vec3<double>, 3>& coordinate_basis() {
  static const std::array<Vec3<double>, 3> basis{Vec3<double>{1, 0, 0}, Vec3<double>{0, 1, 0},
                                                 Vec3<double>{0, 0, 1}};
  return basis;
}

// ---------------------------------------------------------------------------
// Axioms.

struct AxiomResiduals {
  double eta_xi = 0.0;       // |eta(xi) - 1|
  double phi_squared = 0.0;  // max |phi^2 + Id - xi (x) eta|
  double compatible = 0.0;   // max |g(phi., phi.) - g + eta (x) eta|
  double phi_xi = 0.0;       // |phi xi|
  double eta_phi = 0.0;      // |eta o phi|
};

inline AxiomResiduals axiom_residuals(const Geometry1& geo) {
  AxiomResiduals r;
  r.eta_xi = std::fabs(pair(geo.eta, geo.xi) - 1.0);
  const Mat3<double> phi2 = matmul(geo.phi, geo.phi);
  const Mat3<double> xi_eta = outer(geo.xi, geo.eta);
  Mat3<double> a = zero_mat<double>();
  Mat3<double> b = zero_mat<double>();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      a[i][j] = phi2[i][j] + (i == j ? 1.0 : 0.0) - xi_eta[i][j];
      const Vec3<double>& ei = coordinate_basis()[i];
      const Vec3<double>& ej = coordinate_basis()[j];
      b[i][j] = inner(geo.g, act(geo.phi, ei), act(geo.phi, ej)) - geo.g[i][j] +
                geo.eta[i] * geo.eta[j];
    }
  r.phi_squared = max_abs(a);
  r.compatible = max_abs(b);
  r.phi_xi = norm(act(geo.phi, geo.xi));
  r.eta_phi = norm(pullback(geo.eta, geo.phi));
  return r;
}

inline const std::vector<std::string>& axiom_names() {
  static const std::vector<std::string> names{"eta(xi) = 1", "phi^2 = -Id + eta(x)xi",
                                              "g(phiX, phiY) = g(X, Y) - eta(X)eta(Y)",
                                              "phi xi = 0", "eta o phi = 0"};
  return names;
}

/// Maxima of the structure axioms (and their two consequences) over pts.
template <FirstOrderStructure T>
ResidualReport check_axioms(const T& s, const std::vector<Point>& pts, double tol = 1e-8) {
  return evaluate_residuals(axiom_names(), tol, pts, [&](const Point& p) {
    const Geometry1 geo = geometry(s, p);
    if (!positive_definite(geo.g))
      throw SingularMetric("metric not positive definite at " + to_string(p));
    const AxiomResiduals r = axiom_residuals(geo);
    return std::vector<double>{r.eta_xi, r.phi_squared, r.compatible, r.phi_xi, r.eta_phi};
  });
}

// ---------------------------------------------------------------------------
// Tensors built from brackets. Vector arguments given as plain vectors are
// extended as constant-coefficient coordinate fields.

/// Phi(X, Y) = g(X, phi Y)
template <FirstOrderStructure T>
double fundamental_two_form(const T& s, const Vec3<double>& x, const Vec3<double>& y, const Point& p) {
  const Geometry1 geo = geometry(s, p);
  return inner(geo.g, x, act(geo.phi, y));
}

template <class S>
Vec3<S> nijenhuis(const Mat3<Dual<S>>& phi, const Vec3<Dual<S>>& x, const Vec3<Dual<S>>& y) {
  const Mat3<S> phi_v = values(phi);
  const Vec3<Dual<S>> phix = act(phi, x);
  const Vec3<Dual<S>> phiy = act(phi, y);
  const Vec3<S> xy = bracket(x, y);
  return act(phi_v, act(phi_v, xy)) + bracket(phix, phiy) - act(phi_v, bracket(phix, y)) -
         act(phi_v, bracket(x, phiy));
}

/// N^(1)(X, Y) = N_phi(X, Y) + 2 d eta(X, Y) xi
template <class S>
Vec3<S> n1(const StructureJet<S>& s, const Vec3<Dual<S>>& x, const Vec3<Dual<S>>& y) {
  const S deta = eval_form(exterior_d(s.eta), values(x), values(y));
  return nijenhuis(s.phi, x, y) + scale(2.0 * deta, values(s.xi));
}

/// N^(3)(X) = (L_xi phi) X = phi [X, xi] - [phi X, xi]
template <class S>
Vec3<S> n3(const StructureJet<S>& s, const Vec3<Dual<S>>& x) {
  return act(values(s.phi), bracket(x, s.xi)) - bracket(act(s.phi, x), s.xi);
}

template <FirstOrderStructure T>
Vec3<double> nijenhuis(const T& s, const Vec3<double>& x, const Vec3<double>& y, const Point& p) {
  return nijenhuis(s.first_order(p).phi, constant_field(x), constant_field(y));
}

template <FirstOrderStructure T>
Vec3<double> n1_tensor(const T& s, const Vec3<double>& x, const Vec3<double>& y, const Point& p) {
  return n1(s.first_order(p), constant_field(x), constant_field(y));
}

template <FirstOrderStructure T>
Vec3<double> n3_tensor(const T& s, const Vec3<double>& x, const Point& p) {
  return n3(s.first_order(p), constant_field(x));
}

/// max over pairs of a g-orthonormal frame of |N(e_a, e_b)|_g for an antisymmetric
/// vector-valued tensor N.
template <class Fn>
double max_pair_norm(const Mat3<double>& g, Fn&& tensor) {
  const auto e = orthonormal_frame(g);
  double m = 0.0;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b)
      m = std::max(m, norm_g(g, tensor(constant_field(e[a]), constant_field(e[b]))));
  return m;
}

inline double n1_norm(const Geometry1& geo) {
  return max_pair_norm(geo.g, [&](const auto& x, const auto& y) { return n1(geo.jet, x, y); });
}

inline double nijenhuis_norm(const Geometry1& geo) {
  return max_pair_norm(geo.g, [&](const auto& x, const auto& y) { return nijenhuis(geo.jet.phi, x, y); });
}

// ---------------------------------------------------------------------------
// Olszak functions and the trans-Sasakian condition.

struct OlszakPair {
  double alpha = 0.0;
  double beta = 0.0;
};

/// 2 alpha = tr(X -> phi nabla_X xi), 2 beta = div xi
inline OlszakPair olszak_alpha_beta(const Geometry1& geo) {
  double tr_phi_nabla = 0.0;
  double div_xi = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const Vec3<double> col = geo.nabla_xi(coordinate_basis()[i]);
    tr_phi_nabla += act(geo.phi, col)[i];
    div_xi += col[i];
  }
  return {0.5 * tr_phi_nabla, 0.5 * div_xi};
}

template <FirstOrderStructure T>
OlszakPair olszak_alpha_beta(const T& s, const Point& p) {
  return olszak_alpha_beta(geometry(s, p));
}

/// max over a g-orthonormal frame of |nabla_X xi + alpha phi X + beta phi^2 X|_g
inline double trans_sasakian_defect(const Geometry1& geo, double alpha, double beta) {
  double m = 0.0;
  for (const auto& x : orthonormal_frame(geo.g)) {
    const Vec3<double> phix = act(geo.phi, x);
    const Vec3<double> r = geo.nabla_xi(x) + scale(alpha, phix) + scale(beta, act(geo.phi, phix));
    m = std::max(m, norm_g(geo.g, r));
  }
  return m;
}

/// Trans-Sasakian residual for fixed (alpha, beta).
template <FirstOrderStructure T>
double trans_sasakian_residual(const T& s, double alpha, double beta, const std::vector<Point>& pts) {
  const auto rep = evaluate_residuals({"trans-Sasakian"}, 0.0, pts, [&](const Point& p) {
    return std::vector<double>{trans_sasakian_defect(geometry(s, p), alpha, beta)};
  });
  if (!rep.issues.empty()) throw SingularMetric(rep.issues.front().message);
  return rep.residuals.front().max;
}

// ---------------------------------------------------------------------------
// Classification.

enum class Verdict { Sasakian, AlphaSasakian, Kenmotsu, BetaKenmotsu, Cosymplectic, TransSasakian, NotNormal };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Sasakian: return "Sasakian";
    case Verdict::AlphaSasakian: return "alpha-Sasakian";
    case Verdict::Kenmotsu: return "Kenmotsu";
    case Verdict::BetaKenmotsu: return "beta-Kenmotsu";
    case Verdict::Cosymplectic: return "cosymplectic";
    case Verdict::TransSasakian: return "trans-Sasakian";
    case Verdict::NotNormal: return "not-normal";
  }
  return "?";
}

/// Kenmotsu is the beta = 1 member of the beta-Kenmotsu class; likewise for Sasakian.
inline bool in_beta_kenmotsu_class(Verdict v) { return v == Verdict::Kenmotsu || v == Verdict::BetaKenmotsu; }
inline bool in_alpha_sasakian_class(Verdict v) { return v == Verdict::Sasakian || v == Verdict::AlphaSasakian; }

struct ClassificationReport {
  std::vector<Point> points;
  std::vector<double> alpha;
  std::vector<double> beta;
  double normality_residual = 0.0;      // max |N^(1)|
  double trans_sasakian_residual = 0.0;  // with the pointwise (alpha, beta)
  double alpha_mean = 0.0, alpha_stddev = 0.0;
  double beta_mean = 0.0, beta_stddev = 0.0;
  Verdict verdict = Verdict::NotNormal;
  std::vector<PointIssue> issues;

  bool normal(double tol) const { return normality_residual < tol; }
};

/// Verdict from sampled Olszak functions and the normality residual.
inline Verdict decide_verdict(const std::vector<double>& alpha, const std::vector<double>& beta,
                              double normality_residual, double tol) {
  if (!(normality_residual < tol)) return Verdict::NotNormal;
  const bool alpha_zero = max_abs(alpha) < tol;
  const bool beta_zero = max_abs(beta) < tol;
  const auto [am, as] = mean_stddev(alpha);
  const auto [bm, bs] = mean_stddev(beta);
  if (alpha_zero && beta_zero) return Verdict::Cosymplectic;
  if (alpha_zero) return (bs < tol && std::fabs(bm - 1.0) < tol) ? Verdict::Kenmotsu : Verdict::BetaKenmotsu;
  if (beta_zero) return (as < tol && std::fabs(am - 1.0) < tol) ? Verdict::Sasakian : Verdict::AlphaSasakian;
  return Verdict::TransSasakian;
}

/// Classifies a structure over pts. tol is the classification zero/constancy threshold.
template <FirstOrderStructure T>
ClassificationReport classify(const T& s, const std::vector<Point>& pts, double tol = 1e-6) {
  struct Sample {
    OlszakPair ab;
    double n1 = 0.0;
    double ts = 0.0;
    std::optional<std::string> issue;
  };
  const auto samples = detail::map_points<Sample>(pts, [&](const Point& p) {
    Sample out;
    try {
      const Geometry1 geo = geometry(s, p);
      out.ab = olszak_alpha_beta(geo);
      out.n1 = n1_norm(geo);
      out.ts = trans_sasakian_defect(geo, out.ab.alpha, out.ab.beta);
    } catch (const std::runtime_error& e) {
      out.issue = e.what();
    }
    return out;
  });

  ClassificationReport rep;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Sample& smp = samples[i];
    if (smp.issue) {
      rep.issues.push_back(PointIssue{pts[i], *smp.issue});
      continue;
    }
    rep.points.push_back(pts[i]);
    rep.alpha.push_back(smp.ab.alpha);
    rep.beta.push_back(smp.ab.beta);
    rep.normality_residual = std::max(rep.normality_residual, smp.n1);
    rep.trans_sasakian_residual = std::max(rep.trans_sasakian_residual, smp.ts);
  }
  std::tie(rep.alpha_mean, rep.alpha_stddev) = mean_stddev(rep.alpha);
  std::tie(rep.beta_mean, rep.beta_stddev) = mean_stddev(rep.beta);
  rep.verdict = rep.points.empty() ? Verdict::NotNormal
                                   : decide_verdict(rep.alpha, rep.beta, rep.normality_residual, tol);
  return rep;
}

template <FirstOrderStructure T>
ClassificationReport classify(const T& s, std::size_t samples = kDefaultSamples, std::uint64_t seed = 0) {
  return classify(s, s.domain().sample(samples, seed));
}

} // namespace cornerkit

#endif
