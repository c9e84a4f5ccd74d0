// Prints one PASS/FAIL line per acceptance criterion. Exit status 1 if any fails.
// Usage: acceptance [path-to-cornerkit-cli]

#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cornerkit/construct.hpp"
#include "cornerkit/family.hpp"
#include "cornerkit/scene.hpp"
#include "support.hpp"

using namespace cornerkit;

namespace {

constexpr std::uint64_t kSeed = 20240601;
constexpr std::size_t kPoints = 100;

const char* const kCornerPresets[] = {"family:A", "family:B", "family:D"};

std::vector<Point> sample(std::uint64_t salt = 0) { return ChartDomain{}.sample(kPoints, kSeed + salt); }

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

/// Random family draws; `corner` is the same draw with the x1 dependence of kappa removed.
struct Draw {
  FamilyParams full;
  FamilyParams corner;
};

std::vector<Draw> draws() {
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> c(0.3, 1.0);
  std::vector<Draw> out;
  for (int i = 0; i < 20; ++i) {
    Draw d;
    d.corner = testing_support::random_corner_family(rng);
    d.full = d.corner;
    d.full.kappa = d.full.kappa * parse("exp(" + std::to_string(c(rng)) + "*x1)");
    out.push_back(d);
  }
  return out;
}

void axioms() {
  double worst = 0.0;
  bool ok = true;
  std::uint64_t salt = 0;
  for (const Draw& d : draws()) {
    const FamilyParams& fp = d.full;
    const auto pts = sample(salt++);
    validate(fp, pts);
    const ResidualReport r = check_axioms(build_family(fp), pts, 1e-8);
    ok = ok && r.passed();
    worst = std::max(worst, r.worst());
  }
  report(1, ok, "20 random family draws, max axiom residual " + sci(worst) + " (< 1e-8)");
}

void corner_equivalence() {
  double vec = 0.0, form = 0.0;
  bool ok = true;
  std::uint64_t salt = 0;
  for (const Draw& d : draws()) {
    const auto pts = sample(salt++);
    const AcmStructure s = build_family(d.corner);
    const ResidualReport a = corner_residual(s, pts, 1e-8);
    const ResidualReport b = corner_residual_forms(s, pts, 1e-7);
    ok = ok && a.passed() && b.passed();
    vec = std::max(vec, a.worst());
    form = std::max(form, b.worst());
  }
  const double off =
      corner_residual(build_family(FamilyParams::from_strings("exp(x2)", "exp(x1)", "1")), sample())
          .max("nabla_X xi + eta(X) psi");
  ok = ok && off > 1e-3;
  report(2, ok,
         "kappa_1 = mu_1 = 0: vector form " + sci(vec) + " (< 1e-8), 2-form " + sci(form) +
             " (< 1e-7); kappa = e^x1: " + sci(off) + " (> 1e-3)");
}

void connection_table() {
  double worst = 0.0;
  bool ok = true;
  for (const char* name : kCornerPresets) {
    const ResidualReport r = connection_table_residuals(preset_structure(name), sample(), 1e-8);
    ok = ok && r.passed();
    worst = std::max(worst, r.worst());
  }
  report(3, ok, "seven connection identities on A, B, D, max " + sci(worst) + " (< 1e-8)");
}

void form_identities() {
  double worst = 0.0;
  bool ok = true;
  for (const char* name : kCornerPresets) {
    const ResidualReport r = form_identities_residuals(preset_structure(name), sample(), 1e-8);
    ok = ok && r.passed();
    worst = std::max(worst, r.worst());
  }
  report(4, ok, "coframe 2-form identities on A, B, D, max " + sci(worst) + " (< 1e-8)");
}

void twin_theorems() {
  const auto pts = sample();
  const Preset a = preset("family:A");
  const AcmStructure sa = build_family(a.params, a.name);
  const TwinTheoremReport ken = thken_check(sa, pts, 1e-6);
  // |beta - tau_2 / (tau kappa)| pointwise
  const ClassificationReport& cl = ken.twin_class;
  double beta_gap = 0.0;
  for (std::size_t i = 0; i < cl.points.size(); ++i) {
    const Jet2 t = a.params.tau.eval_jet2(cl.points[i]);
    beta_gap = std::max(beta_gap, std::fabs(cl.beta[i] - t.grad[1] / (t.value * a.params.kappa.eval(cl.points[i]))));
  }
  const bool ken_ok = ken.conditions_hold && in_beta_kenmotsu_class(cl.verdict) && beta_gap < 1e-6 &&
                      !cl.points.empty() && ken.agree();

  const TwinTheoremReport cos = thcos_check(preset_structure("family:B"), pts, 1e-6);
  const bool cos_ok = cos.conditions_hold && cos.twin_class.verdict == Verdict::Cosymplectic &&
                      cos.twin_class.normality_residual < 1e-8 && cos.agree();
  report(5, ken_ok && cos_ok,
         "A bar twin " + to_string(cl.verdict) + ", |beta - tau_2/(tau kappa)| " + sci(beta_gap) +
             " (< 1e-6); B hat twin " + to_string(cos.twin_class.verdict) + ", normality " +
             sci(cos.twin_class.normality_residual) + " (< 1e-8); routes agree " +
             (ken.agree() && cos.agree() ? "yes" : "no"));
}

void deformation() {
  const auto& names = deformed_residual_names();
  double phi = 0.0, lemma = 0.0, deta = 0.0, dphi = 0.0, deta_derived = 0.0;
  std::string where;
  for (const char* base : {"family:B", "family:D"})
    for (const char* f : {"1", "exp(x1)", "1 + x2^2"}) {
      const DeformedType dt = deformed_type(preset_structure(base), DeformationParams{parse(f)}, sample(), 1e-7);
      phi = std::max(phi, dt.residuals.max(names[0]));
      lemma = std::max(lemma, dt.residuals.max(names[1]));
      const double e = dt.residuals.max(names[2]);
      if (e >= 1e-7 && where.empty()) where = std::string(" first exceeded on ") + base + ", f = " + f;
      deta = std::max(deta, e);
      deta_derived = std::max(deta_derived, dt.residuals.max(names[3]));
      dphi = std::max(dphi, dt.residuals.max(names[4]));
    }
  const bool ok = phi < 1e-9 && lemma < 1e-8 && deta < 1e-7 && dphi < 1e-7;
  report(6, ok,
         "Phi~ = f Phi " + sci(phi) + " (< 1e-9); lemma " + sci(lemma) + " (< 1e-8); d Phi~ " + sci(dphi) +
             " (< 1e-7); d eta~ as stated " + sci(deta) + " (< 1e-7)" + where +
             "; with the opposite sign on the (e^rho - div V) term " + sci(deta_derived));
}

void ntilde() {
  double disc = 0.0, smallest_norm = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (const char* name : kCornerPresets)
    for (const char* f : {"1", "exp(x1)", "1 + x2^2"}) {
      const AcmStructure s = preset_structure(name);
      const NTildeReport r = ntilde_identity_residual(s, DeformationParams{parse(f)}, sample(), 200, kSeed, 1e-7);
      ok = ok && r.discrepancy.passed();
      disc = std::max(disc, r.discrepancy.worst());
      // all three presets have sigma = 0
      ok = ok && closed_omega_check(s, sample()).max_abs_sigma < 1e-6;
      smallest_norm = std::min(smallest_norm, r.max_norm);
    }
  ok = ok && smallest_norm > 1e-2;
  report(7, ok,
         "closed form vs brute force over 200 probes, max " + sci(disc) + " (< 1e-7); sigma = 0 presets, max |N~(1)| >= " +
             sci(smallest_norm) + " (> 1e-2)");
}

void closed_omega() {
  bool ok = true;
  std::string detail;
  for (const std::string& name : preset_names()) {
    const ClosedOmegaReport r = closed_omega_check(preset_structure(name), sample(), 1e-8, 1e-6);
    ok = ok && r.implication_holds && r.issues.empty();
    detail += name.substr(7) + ": |d omega| " + sci(r.max_domega) + ", |sigma| " + sci(r.max_abs_sigma) + "; ";
  }
  report(8, ok, detail + "closed omega => |sigma| < 1e-6");
}

void kernel_oracles() {
  using testing_support::central;
  using testing_support::rel_err;
  std::mt19937_64 rng(kSeed);
  const auto pts = sample();
  double gamma_err = 0.0, jet_err = 0.0, cross_err = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const MetricField g = testing_support::random_metric(rng);
    for (std::size_t k = 0; k < 10; ++k) {
      const Point& p = pts[k + 10 * trial];
      const Gamma<double> exact = christoffel(g, p);
      const Gamma<double> fd = testing_support::christoffel_fd(g, p, 1e-4);
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b)
          for (std::size_t c = 0; c < 3; ++c) gamma_err = std::max(gamma_err, rel_err(exact[a][b][c], fd[a][b][c]));
    }
    const ScalarExpr e = parse(testing_support::random_expr(rng, 3));
    for (std::size_t k = 0; k < 10; ++k) {
      const Point& p = pts[k + 10 * trial];
      const Jet2 j = e.eval_jet2(p);
      for (std::size_t i = 0; i < 3; ++i) {
        jet_err = std::max(jet_err, rel_err(j.grad[i], central([&](const Point& q) { return e.eval(q); }, p, i, 1e-4)));
        for (std::size_t l = 0; l < 3; ++l)
          jet_err = std::max(jet_err, rel_err(j.hess[i][l], central([&](const Point& q) { return e.eval_jet2(q).grad[i]; },
                                                                     p, l, 1e-4)));
      }
    }
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t k = 0; k < 10; ++k) {
      const Point& p = pts[k + 10 * trial];
      Mat3<double> gv;
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) gv[a][b] = g.g[a][b].eval(p);
      const Vec3<double> x{u(rng), u(rng), u(rng)}, y{u(rng), u(rng), u(rng)}, z{u(rng), u(rng), u(rng)};
      cross_err = std::max(cross_err, std::fabs(inner(gv, cross(gv, x, y), z) - volume_form(gv, x, y, z)));
    }
  }
  report(9, gamma_err < 1e-5 && jet_err < 1e-5 && cross_err < 1e-9,
         "Christoffel vs central differences " + sci(gamma_err) + ", jets " + sci(jet_err) +
             " (< 1e-5 relative to max(1, |fd|)); g(X x Y, Z) - vol(X, Y, Z) " + sci(cross_err) + " (< 1e-9)");
}

std::string capture(const std::string& cmd) {
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  if (!pipe) return {};
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe.get())) > 0) out.append(buf.data(), n);
  return out;
}

void determinism(const char* cli) {
  if (cli) {
    const std::string cmd = std::string("\"") + cli + "\" check --preset family:B --seed 7 2>/dev/null";
    const std::string a = capture(cmd), b = capture(cmd);
    report(10, !a.empty() && a == b,
           "two CLI runs of check --preset family:B --seed 7: " + std::to_string(a.size()) + " bytes, " +
               (a == b ? "identical" : "different"));
    return;
  }
  SceneConfig c;
  c.source = std::string("family:B");
  c.seed = 7;
  const std::string a = run(c).report.dump(2), b = run(c).report.dump(2);
  report(10, a == b, "two library runs of check family:B seed 7: " + std::string(a == b ? "identical" : "different"));
}

} // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<void()>> criteria{axioms,       corner_equivalence, connection_table, form_identities,
                                                    twin_theorems, deformation,        ntilde,           closed_omega,
                                                    kernel_oracles};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, std::string("error: ") + e.what());
    }
  }
  try {
    determinism(argc > 1 ? argv[1] : nullptr);
  } catch (const std::exception& e) {
    report(10, false, std::string("error: ") + e.what());
  }
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
