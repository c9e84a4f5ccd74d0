#ifndef CORNERKIT_CORNER_HPP
#define CORNERKIT_CORNER_HPP

// Corner (C12) structures in dimension 3: detection residuals, the
// fundamental frame {xi, V, phi V} with dual coframe {eta, theta1, theta2},
// and the connection / 2-form identities that hold on it.

#include <cmath>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cornerkit/acms.hpp"
#include "cornerkit/report.hpp"
#include "cornerkit/tensor.hpp"

namespace cornerkit {

inline constexpr double kCornerDegeneracy = 1e-8;

/// |psi| at or below the degeneracy threshold: rho = ln|psi| and V are undefined.
class DegenerateCorner : public std::runtime_error {
 public:
  explicit DegenerateCorner(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Characterizations (first order).

/// Residuals of nabla_X xi = -eta(X) psi and nabla_{phi X} xi = 0 at one point,
/// over a g-orthonormal frame of probes.
inline std::pair<double, double> corner_defects(const Geometry1& geo) {
  const Vec3<double> psi = geo.psi();
  double r1 = 0.0;
  double r2 = 0.0;
  for (const auto& x : orthonormal_frame(geo.g)) {
    r1 = std::max(r1, norm_g(geo.g, geo.nabla_xi(x) + scale(pair(geo.eta, x), psi)));
    r2 = std::max(r2, norm_g(geo.g, geo.nabla_xi(act(geo.phi, x))));
  }
  return {r1, r2};
}

/// max |nabla_X xi + eta(X) psi| and max |nabla_{phi X} xi| over pts.
template <FirstOrderStructure T>
ResidualReport corner_residual(const T& s, const std::vector<Point>& pts, double tol = 1e-8) {
  return evaluate_residuals({"nabla_X xi + eta(X) psi", "nabla_{phi X} xi"}, tol, pts, [&](const Point& p) {
    const auto [r1, r2] = corner_defects(geometry(s, p));
    return std::vector<double>{r1, r2};
  });
}

struct FormDefects {
  double deta_minus_omega_eta = 0.0;  // max |d eta - omega ^ eta| (components)
  double dphi = 0.0;                  // |d Phi|_123
  double nphi = 0.0;                  // max |N_phi|
};

inline FormDefects corner_form_defects(const Geometry1& geo) {
  FormDefects d;
  const Vec3<double> omega = flat(geo.g, geo.psi());
  const Mat3<double> deta = exterior_d(geo.jet.eta);
  const Mat3<double> we = wedge(omega, geo.eta);
  Mat3<double> diff;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) diff[i][j] = deta[i][j] - we[i][j];
  d.deta_minus_omega_eta = max_abs(diff);
  d.dphi = std::fabs(exterior_d(geo.fundamental_form_field()));
  d.nphi = nijenhuis_norm(geo);
  return d;
}

/// Residuals of d eta = omega ^ eta, d Phi = 0, N_phi = 0.
template <FirstOrderStructure T>
ResidualReport corner_residual_forms(const T& s, const std::vector<Point>& pts, double tol = 1e-8) {
  return evaluate_residuals({"d eta - omega ^ eta", "d Phi", "N_phi"}, tol, pts, [&](const Point& p) {
    const FormDefects d = corner_form_defects(geometry(s, p));
    return std::vector<double>{d.deta_minus_omega_eta, d.dphi, d.nphi};
  });
}

/// Residual of (nabla_X phi) Y = eta(X)(omega(phi Y) xi + eta(Y) phi psi) over frame pairs.
inline double nabla_phi_defect(const Geometry1& geo) {
  const Vec3<double> psi = geo.psi();
  const Vec3<double> omega = flat(geo.g, psi);
  const auto e = orthonormal_frame(geo.g);
  double m = 0.0;
  for (const auto& x : e)
    for (const auto& y : e) {
      const Vec3<double> lhs = covariant_endo(geo.gamma, x, geo.jet.phi, y);
      const Vec3<double> rhs = scale(pair(geo.eta, x), scale(pair(omega, act(geo.phi, y)), geo.xi) +
                                                           scale(pair(geo.eta, y), act(geo.phi, psi)));
      m = std::max(m, norm_g(geo.g, lhs - rhs));
    }
  return m;
}

template <FirstOrderStructure T>
ResidualReport nabla_phi_residual(const T& s, const std::vector<Point>& pts, double tol = 1e-8) {
  return evaluate_residuals({"(nabla_X phi)Y - eta(X)(omega(phiY)xi + eta(Y)phi psi)"}, tol, pts,
                            [&](const Point& p) { return std::vector<double>{nabla_phi_defect(geometry(s, p))}; });
}

// ---------------------------------------------------------------------------
// The fundamental frame (needs second-order jets).

/// Frame fields with their first derivatives at one point.
struct FrameJets {
  Vec3<Jet> psi;
  Vec3<Jet> omega;
  Jet e_rho;  // |psi|
  Jet rho;
  Vec3<Jet> v;
  Vec3<Jet> phi_v;
  Vec3<Jet> theta1;
  Vec3<Jet> theta2;
};

/// Values of the fundamental frame and its scalar invariants.
struct CornerFrame {
  Vec3<double> omega;
  Vec3<double> psi;
  double rho = 0.0;
  double e_rho = 0.0;
  Vec3<double> v;
  Vec3<double> phi_v;
  Vec3<double> theta1;
  Vec3<double> theta2;
  double sigma = 0.0;     // g(nabla_xi V, phi V)
  double div_v = 0.0;
  double phi_v_rho = 0.0;  // (phi V)(rho)
};

/// Everything known about a corner structure at one point.
struct CornerPoint {
  Geometry1 geo;
  FrameJets jets;
  CornerFrame frame;
  Vec3<double> grad_rho;  // dual of d rho

  /// Orthonormal frame (xi, V, phi V).
  std::array<Vec3<double>, 3> basis() const { return {geo.xi, frame.v, frame.phi_v}; }
  /// Dual coframe (eta, theta1, theta2).
  std::array<Vec3<double>, 3> cobasis() const { return {geo.eta, frame.theta1, frame.theta2}; }
};

inline FrameJets frame_jets(const StructureJet<Jet>& s2, const Point& p) {
  const Mat3<Jet> g = values(s2.g);
  Mat3<double> gp;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) gp[i][j] = g[i][j].v;
  check_metric(gp, p);
  const Gamma<Jet> gamma = christoffel(s2.g);
  const Vec3<Jet> xi = values(s2.xi);
  const Mat3<Jet> phi = values(s2.phi);

  FrameJets f;
  f.psi = -covariant(gamma, xi, s2.xi);
  f.omega = flat(g, f.psi);
  const Jet norm2 = inner(g, f.psi, f.psi);
  if (!(norm2.v > kCornerDegeneracy * kCornerDegeneracy))
    throw DegenerateCorner("|psi| = " + std::to_string(std::sqrt(std::max(0.0, norm2.v))) +
                           " at " + to_string(p) + " is below the degeneracy threshold");
  f.e_rho = sqrt(norm2);
  f.rho = log(f.e_rho);
  const Jet inv = 1.0 / f.e_rho;
  f.v = scale(inv, f.psi);
  f.phi_v = act(phi, f.v);
  f.theta1 = scale(inv, f.omega);
  f.theta2 = scale(-inv, pullback(f.omega, phi));
  return f;
}

template <SecondOrderStructure T>
CornerPoint corner_point(const T& s, const Point& p) {
  const StructureJet<Jet> s2 = s.second_order(p);
  FrameJets jets = frame_jets(s2, p);
  Geometry1 geo(truncate(s2), p);
  CornerFrame fr;
  fr.omega = primal(jets.omega);
  fr.psi = primal(jets.psi);
  fr.e_rho = jets.e_rho.v;
  fr.rho = jets.rho.v;
  fr.v = primal(jets.v);
  fr.phi_v = primal(jets.phi_v);
  fr.theta1 = primal(jets.theta1);
  fr.theta2 = primal(jets.theta2);
  fr.sigma = inner(geo.g, covariant(geo.gamma, geo.xi, jets.v), fr.phi_v);
  fr.div_v = divergence(geo.gamma, jets.v);
  fr.phi_v_rho = directional(fr.phi_v, jets.rho);
  const Vec3<double> grad_rho = act(inverse(geo.g), Vec3<double>(jets.rho.d));
  return CornerPoint{std::move(geo), std::move(jets), fr, grad_rho};
}

/// The fundamental frame at p. Throws DegenerateCorner when |psi| <= 1e-8.
template <SecondOrderStructure T>
CornerFrame corner_frame(const T& s, const Point& p) {
  return corner_point(s, p).frame;
}

/// Orthonormality of {xi, V, phi V} and duality with {eta, theta1, theta2}.
inline std::pair<double, double> frame_defects(const CornerPoint& cp) {
  const auto e = cp.basis();
  const auto th = cp.cobasis();
  double ortho = 0.0;
  double dual = 0.0;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) {
      const double delta = a == b ? 1.0 : 0.0;
      ortho = std::max(ortho, std::fabs(inner(cp.geo.g, e[a], e[b]) - delta));
      dual = std::max(dual, std::fabs(pair(th[a], e[b]) - delta));
    }
  return {ortho, dual};
}

/// |grad rho - (xi(rho) xi + V(rho) V + phiV(rho) phiV)|_g
inline double grad_rho_defect(const CornerPoint& cp) {
  Vec3<double> rebuilt = zero_vec<double>();
  for (const auto& e : cp.basis()) rebuilt = rebuilt + scale(directional(e, cp.jets.rho), e);
  return norm_g(cp.geo.g, cp.grad_rho - rebuilt);
}

inline const std::vector<std::string>& connection_table_names() {
  static const std::vector<std::string> names{
      "nabla_xi V - e^rho xi - sigma phiV",
      "nabla_V V - phiV(rho) phiV",
      "nabla_phiV V - (div V - e^rho) phiV",
      "nabla_xi phiV + sigma V",
      "nabla_V phiV + phiV(rho) V",
      "nabla_phiV phiV - (e^rho - div V) V",
      "nabla_X xi + e^rho eta(X) V"};
  return names;
}

inline std::vector<double> connection_table_defects(const CornerPoint& cp) {
  const Geometry1& geo = cp.geo;
  const CornerFrame& f = cp.frame;
  const auto nab = [&](const Vec3<double>& x, const Vec3<Jet>& y) { return covariant(geo.gamma, x, y); };
  const auto n = [&](const Vec3<double>& v) { return norm_g(geo.g, v); };
  std::vector<double> r(7);
  r[0] = n(nab(geo.xi, cp.jets.v) - scale(f.e_rho, geo.xi) - scale(f.sigma, f.phi_v));
  r[1] = n(nab(f.v, cp.jets.v) - scale(f.phi_v_rho, f.phi_v));
  r[2] = n(nab(f.phi_v, cp.jets.v) - scale(f.div_v - f.e_rho, f.phi_v));
  r[3] = n(nab(geo.xi, cp.jets.phi_v) + scale(f.sigma, f.v));
  r[4] = n(nab(f.v, cp.jets.phi_v) + scale(f.phi_v_rho, f.v));
  r[5] = n(nab(f.phi_v, cp.jets.phi_v) - scale(f.e_rho - f.div_v, f.v));
  double m = 0.0;
  for (const auto& x : orthonormal_frame(geo.g))
    m = std::max(m, n(geo.nabla_xi(x) + scale(f.e_rho * pair(geo.eta, x), f.v)));
  r[6] = m;
  return r;
}

/// The seven connection identities on the fundamental frame.
template <SecondOrderStructure T>
ResidualReport connection_table_residuals(const T& s, const std::vector<Point>& pts, double tol = 1e-8) {
  return evaluate_residuals(connection_table_names(), tol, pts,
                            [&](const Point& p) { return connection_table_defects(corner_point(s, p)); });
}

/// Largest value of a 2-form on the pairs of the orthonormal frame.
inline double frame_norm(const CornerPoint& cp, const Mat3<double>& form) {
  const auto e = cp.basis();
  double m = 0.0;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b) m = std::max(m, std::fabs(eval_form(form, e[a], e[b])));
  return m;
}

inline Mat3<double> combine(std::initializer_list<std::pair<double, Mat3<double>>> terms) {
  Mat3<double> r = zero_mat<double>();
  for (const auto& [c, m] : terms)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) r[i][j] += c * m[i][j];
  return r;
}

inline const std::vector<std::string>& form_identity_names() {
  static const std::vector<std::string> names{
      "Phi - 2 theta2 ^ theta1",
      "d theta1 - (sigma eta ^ theta2 + phiV(rho) theta1 ^ theta2)",
      "d theta2 - (-sigma eta ^ theta1 - (e^rho - div V) theta1 ^ theta2)",
      "d theta2 - (sigma e^-rho d eta + 1/2 (e^rho - div V) Phi)"};
  return names;
}

inline std::vector<double> form_identity_defects(const CornerPoint& cp) {
  const Geometry1& geo = cp.geo;
  const CornerFrame& f = cp.frame;
  const Mat3<double> phi_form = values(geo.fundamental_form_field());
  const Mat3<double> deta = exterior_d(geo.jet.eta);
  const Mat3<double> dth1 = exterior_d(cp.jets.theta1);
  const Mat3<double> dth2 = exterior_d(cp.jets.theta2);
  const Mat3<double> t2t1 = wedge(f.theta2, f.theta1);
  const Mat3<double> t1t2 = wedge(f.theta1, f.theta2);
  const Mat3<double> et1 = wedge(geo.eta, f.theta1);
  const Mat3<double> et2 = wedge(geo.eta, f.theta2);
  return {
      frame_norm(cp, combine({{1.0, phi_form}, {-2.0, t2t1}})),
      frame_norm(cp, combine({{1.0, dth1}, {-f.sigma, et2}, {-f.phi_v_rho, t1t2}})),
      frame_norm(cp, combine({{1.0, dth2}, {f.sigma, et1}, {f.e_rho - f.div_v, t1t2}})),
      frame_norm(cp, combine({{1.0, dth2}, {-f.sigma / f.e_rho, deta}, {-0.5 * (f.e_rho - f.div_v), phi_form}})),
  };
}

/// 2-form identities of the fundamental coframe.
template <SecondOrderStructure T>
ResidualReport form_identities_residuals(const T& s, const std::vector<Point>& pts, double tol = 1e-8) {
  return evaluate_residuals(form_identity_names(), tol, pts,
                            [&](const Point& p) { return form_identity_defects(corner_point(s, p)); });
}

/// Frame invariants: orthonormality, duality, gradient decomposition of rho.
template <SecondOrderStructure T>
ResidualReport frame_invariant_residuals(const T& s, const std::vector<Point>& pts, double tol = 1e-8) {
  return evaluate_residuals({"orthonormal {xi, V, phiV}", "dual pairing", "grad rho decomposition"},
                            {tol, tol, 1e-7}, pts, [&](const Point& p) {
                              const CornerPoint cp = corner_point(s, p);
                              const auto [o, d] = frame_defects(cp);
                              return std::vector<double>{o, d, grad_rho_defect(cp)};
                            });
}

// ---------------------------------------------------------------------------
// Closed omega.

struct ClosedOmegaReport {
  double max_domega = 0.0;
  double max_abs_sigma = 0.0;
  std::optional<Point> sigma_argmax;
  bool omega_closed = false;
  bool implication_holds = true;  // closed omega => sigma = 0
  std::vector<PointIssue> issues;
};

/// d omega needs only psi's jet, so it is available even where the frame degenerates.
inline Mat3<double> d_omega(const StructureJet<Jet>& s2, const Point& p) {
  const Mat3<Jet> g = values(s2.g);
  Mat3<double> gp;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) gp[i][j] = g[i][j].v;
  check_metric(gp, p);
  const Gamma<Jet> gamma = christoffel(s2.g);
  const Vec3<Jet> omega = flat(g, Vec3<Jet>(-covariant(gamma, values(s2.xi), s2.xi)));
  return exterior_d(omega);
}

/// Reports max |d omega| and max |sigma|; when omega is closed (below closed_tol), sigma must
/// vanish (below sigma_tol).
template <SecondOrderStructure T>
ClosedOmegaReport closed_omega_check(const T& s, const std::vector<Point>& pts, double closed_tol = 1e-8,
                                     double sigma_tol = 1e-6) {
  ClosedOmegaReport rep;
  const auto res = evaluate_residuals({"d omega", "sigma"}, 0.0, pts, [&](const Point& p) {
    const double dw = max_abs(d_omega(s.second_order(p), p));
    return std::vector<double>{dw, std::fabs(corner_frame(s, p).sigma)};
  });
  rep.issues = res.issues;
  rep.max_domega = res.max("d omega");
  rep.max_abs_sigma = res.max("sigma");
  rep.sigma_argmax = res.at("sigma").argmax;
  rep.omega_closed = rep.max_domega < closed_tol;
  rep.implication_holds = !rep.omega_closed || rep.max_abs_sigma < sigma_tol;
  return rep;
}

} // namespace cornerkit

#endif
