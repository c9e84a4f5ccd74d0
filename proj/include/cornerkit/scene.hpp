#ifndef CORNERKIT_SCENE_HPP
#define CORNERKIT_SCENE_HPP

// Batch driver behind the command-line tool: a scene (structure source,
// chart box, sampling, tolerances, suites) is run into a JSON report.
// Requires nlohmann/json.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "cornerkit/acms.hpp"
#include "cornerkit/construct.hpp"
#include "cornerkit/corner.hpp"
#include "cornerkit/family.hpp"
#include "cornerkit/report.hpp"

namespace cornerkit {

inline constexpr int kSchemaVersion = 1;

inline constexpr const char* kConventionBanner =
    "(a^b)(X,Y) = 1/2 (a(X)b(Y) - a(Y)b(X)); "
    "d theta(X,Y) = 1/2 (X theta(Y) - Y theta(X) - theta([X,Y])); "
    "2-form components F_ij = F(d_i, d_j); 3-forms reported by their 123-component; "
    "coordinates x1..x3, (x1,x2,x3) positively oriented";

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"axioms", "corner", "frame", "forms", "twins", "deform", "classify"};
  return names;
}

struct FamilySource {
  std::string tau = "1";
  std::string kappa = "1";
  std::string mu = "1";
};

struct RawSource {
  std::array<std::array<std::string, 3>, 3> phi;  // phi[k][i] = (phi d_i)^k
  std::array<std::string, 3> xi;
  std::array<std::string, 3> eta;
  std::array<std::array<std::string, 3>, 3> g;
};

struct SceneConfig {
  std::variant<std::string, FamilySource, RawSource> source = std::string("family:B");
  std::optional<ChartDomain> box;  // preset box when absent
  std::size_t samples = kDefaultSamples;
  std::uint64_t seed = 0;
  Tolerances tol;
  std::vector<std::string> suites{"axioms", "corner", "frame", "forms"};
  std::optional<std::string> f;

  void validate() const {
    if (samples < 1) throw ConfigError("samples must be at least 1");
    if (!tol.valid())
      throw ConfigError("tolerances must be positive and ordered kernel < classification < failure_floor");
    if (box && !box->valid()) throw ConfigError("box must satisfy lo < hi on every axis");
    if (suites.empty()) throw ConfigError("no suites selected");
    for (const auto& s : suites)
      if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
        throw ConfigError("unknown suite '" + s + "'");
  }
};

inline std::vector<std::string> split_suites(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config file.

namespace detail {

template <std::size_t N>
std::array<std::string, N> string_array(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != N) throw ConfigError(std::string(what) + " must be an array of " + std::to_string(N));
  std::array<std::string, N> out;
  for (std::size_t i = 0; i < N; ++i) {
    if (j[i].is_string()) out[i] = j[i].get<std::string>();
    else if (j[i].is_number()) out[i] = j[i].dump();
    else throw ConfigError(std::string(what) + " entries must be expression strings");
  }
  return out;
}

inline std::array<std::array<std::string, 3>, 3> string_matrix(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(std::string(what) + " must be a 3x3 array");
  return {string_array<3>(j[0], what), string_array<3>(j[1], what), string_array<3>(j[2], what)};
}

inline std::string expr_string(const nlohmann::json& j, const char* what) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) return j.dump();
  throw ConfigError(std::string(what) + " must be an expression string");
}

inline Point point_of(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(std::string(what) + " must be an array of 3 numbers");
  Point p;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw ConfigError(std::string(what) + " must be an array of 3 numbers");
    p[i] = j[i].get<double>();
  }
  return p;
}

} // namespace detail

/// Parses a JSON scene. Keys: preset | family{tau,kappa,mu} | raw{phi,xi,eta,g},
/// box{lo,hi}, samples, seed, tolerances{kernel,classification,failure_floor}, suites, f.
inline SceneConfig parse_scene(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  SceneConfig c;
  const int sources = int(j.contains("preset")) + int(j.contains("family")) + int(j.contains("raw"));
  if (sources > 1) throw ConfigError("give exactly one of preset, family, raw");
  try {
    if (j.contains("preset")) {
      c.source = j.at("preset").get<std::string>();
    } else if (j.contains("family")) {
      const auto& fj = j.at("family");
      FamilySource fs;
      if (fj.contains("tau")) fs.tau = detail::expr_string(fj.at("tau"), "family.tau");
      if (fj.contains("kappa")) fs.kappa = detail::expr_string(fj.at("kappa"), "family.kappa");
      if (fj.contains("mu")) fs.mu = detail::expr_string(fj.at("mu"), "family.mu");
      c.source = fs;
    } else if (j.contains("raw")) {
      const auto& rj = j.at("raw");
      RawSource rs;
      rs.phi = detail::string_matrix(rj.at("phi"), "raw.phi");
      rs.xi = detail::string_array<3>(rj.at("xi"), "raw.xi");
      rs.eta = detail::string_array<3>(rj.at("eta"), "raw.eta");
      rs.g = detail::string_matrix(rj.at("g"), "raw.g");
      c.source = rs;
    }
    if (j.contains("box")) {
      ChartDomain box;
      box.lo = detail::point_of(j.at("box").at("lo"), "box.lo");
      box.hi = detail::point_of(j.at("box").at("hi"), "box.hi");
      c.box = box;
    }
    if (j.contains("samples")) {
      const auto& s = j.at("samples");
      if (!s.is_number_integer() || s.get<long long>() < 1) throw ConfigError("samples must be a positive integer");
      c.samples = s.get<std::size_t>();
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("tolerances")) {
      const auto& t = j.at("tolerances");
      if (t.contains("kernel")) c.tol.kernel = t.at("kernel").get<double>();
      if (t.contains("classification")) c.tol.classification = t.at("classification").get<double>();
      if (t.contains("failure_floor")) c.tol.failure_floor = t.at("failure_floor").get<double>();
    }
    if (j.contains("suites")) {
      const auto& s = j.at("suites");
      c.suites = s.is_string() ? split_suites(s.get<std::string>()) : s.get<std::vector<std::string>>();
    }
    if (j.contains("f")) c.f = detail::expr_string(j.at("f"), "f");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return c;
}

inline SceneConfig parse_scene(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_scene(j);
}

// ---------------------------------------------------------------------------
// Structure construction.

inline AcmStructure build_raw(const RawSource& r, const std::string& name = "raw") {
  AcmStructure s;
  s.name = name;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      s.phi[i][j] = parse(r.phi[i][j]);
      s.g.g[i][j] = parse(r.g[i][j]);
    }
    s.xi.c[i] = parse(r.xi[i]);
    s.eta.c[i] = parse(r.eta[i]);
  }
  return s;
}

struct Scene {
  AcmStructure structure;
  std::vector<Point> points;
  nlohmann::json source;
};

/// Builds the structure and validates it on the sample. Throws ConfigError,
/// ParseError, UnknownPreset, InvalidParams or SingularMetric.
inline Scene build_scene(const SceneConfig& c) {
  c.validate();
  Scene sc;
  if (const auto* name = std::get_if<std::string>(&c.source)) {
    Preset p = preset(*name);
    if (c.box) p.params.box = *c.box;
    sc.structure = build_family(p.params, p.name);
    sc.points = sc.structure.chart.sample(c.samples, c.seed);
    validate(p.params, sc.points);
    sc.source = {{"preset", *name}};
  } else if (const auto* fs = std::get_if<FamilySource>(&c.source)) {
    FamilyParams params = FamilyParams::from_strings(fs->tau, fs->kappa, fs->mu);
    if (c.box) params.box = *c.box;
    sc.structure = build_family(params, "family");
    sc.points = sc.structure.chart.sample(c.samples, c.seed);
    validate(params, sc.points);
    sc.source = {{"family", {{"tau", params.tau.to_string()}, {"kappa", params.kappa.to_string()},
                             {"mu", params.mu.to_string()}}}};
  } else {
    const auto& raw = std::get<RawSource>(c.source);
    sc.structure = build_raw(raw);
    if (c.box) sc.structure.chart = *c.box;
    sc.points = sc.structure.chart.sample(c.samples, c.seed);
    nlohmann::json phi = nlohmann::json::array(), g = nlohmann::json::array();
    for (std::size_t i = 0; i < 3; ++i) {
      nlohmann::json prow = nlohmann::json::array(), grow = nlohmann::json::array();
      for (std::size_t j = 0; j < 3; ++j) {
        prow.push_back(sc.structure.phi[i][j].to_string());
        grow.push_back(sc.structure.g.g[i][j].to_string());
      }
      phi.push_back(prow);
      g.push_back(grow);
    }
    nlohmann::json xi = nlohmann::json::array(), eta = nlohmann::json::array();
    for (std::size_t i = 0; i < 3; ++i) {
      xi.push_back(sc.structure.xi.c[i].to_string());
      eta.push_back(sc.structure.eta.c[i].to_string());
    }
    sc.source = {{"raw", {{"phi", phi}, {"xi", xi}, {"eta", eta}, {"g", g}}}};
  }
  for (const Point& p : sc.points) {
    const Mat3<double> g = values(sc.structure.g.jet<Jet>(p));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j)
        if (std::fabs(g[i][j] - g[j][i]) > c.tol.kernel) throw ConfigError("metric is not symmetric at " + to_string(p));
    check_metric(g, p);
  }
  return sc;
}

// ---------------------------------------------------------------------------
// Report.

inline nlohmann::json to_json(const Point& p) { return nlohmann::json::array({p[0], p[1], p[2]}); }

inline nlohmann::json to_json(const Residual& r) {
  nlohmann::json j{{"name", r.name}, {"max", r.max}, {"tolerance", r.tolerance}, {"pass", r.pass()}};
  j["argmax"] = r.argmax ? to_json(*r.argmax) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const std::vector<PointIssue>& issues) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& i : issues) out.push_back({{"point", to_json(i.point)}, {"message", i.message}});
  return out;
}

/// One suite's section of the report.
struct SuiteResult {
  std::string name;
  std::vector<Residual> residuals;
  std::vector<PointIssue> issues;
  nlohmann::json extra = nlohmann::json::object();
  bool checks_pass = true;  // suite-specific checks beyond residuals

  void add(const ResidualReport& r) {
    residuals.insert(residuals.end(), r.residuals.begin(), r.residuals.end());
    issues.insert(issues.end(), r.issues.begin(), r.issues.end());
  }
  bool passed() const {
    return checks_pass && issues.empty() &&
           std::all_of(residuals.begin(), residuals.end(), [](const Residual& r) { return r.pass(); });
  }
  nlohmann::json json() const {
    nlohmann::json res = nlohmann::json::array();
    for (const auto& r : residuals) res.push_back(to_json(r));
    nlohmann::json j{{"suite", name}, {"passed", passed()}, {"residuals", res}, {"issues", to_json(issues)}};
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    return j;
  }
};

inline nlohmann::json to_json(const ClassificationReport& c) {
  return {{"verdict", to_string(c.verdict)},
          {"normality_residual", c.normality_residual},
          {"trans_sasakian_residual", c.trans_sasakian_residual},
          {"alpha", {{"mean", c.alpha_mean}, {"stddev", c.alpha_stddev}, {"max_abs", max_abs(c.alpha)}}},
          {"beta", {{"mean", c.beta_mean}, {"stddev", c.beta_stddev}, {"max_abs", max_abs(c.beta)}}}};
}

inline nlohmann::json to_json(const TwinTheoremReport& t) {
  return {{"twin", to_string(t.kind)},
          {"conditions_hold", t.conditions_hold},
          {"div_v_defect", t.div_v_defect},
          {"max_abs_sigma", t.sigma},
          {"max_abs_phi_v_rho", t.phi_v_rho},
          {"classification", to_json(t.twin_class)},
          {"beta_minus_e_rho", t.beta_defect},
          {"twin_in_class", t.twin_in_class},
          {"routes_agree", t.agree()}};
}

namespace detail {

inline SuiteResult run_suite(const std::string& name, const Scene& sc, const SceneConfig& c) {
  const AcmStructure& s = sc.structure;
  const auto& pts = sc.points;
  const Tolerances& tol = c.tol;
  SuiteResult r;
  r.name = name;
  if (name == "axioms") {
    r.add(check_axioms(s, pts, tol.kernel));
  } else if (name == "corner") {
    r.add(corner_residual(s, pts, tol.kernel));
    r.add(corner_residual_forms(s, pts, tol.kernel));
  } else if (name == "frame") {
    r.add(frame_invariant_residuals(s, pts, tol.kernel));
    r.add(connection_table_residuals(s, pts, tol.kernel));
  } else if (name == "forms") {
    r.add(form_identities_residuals(s, pts, tol.kernel));
    const ClosedOmegaReport co = closed_omega_check(s, pts, tol.kernel, tol.classification);
    r.issues.insert(r.issues.end(), co.issues.begin(), co.issues.end());
    r.extra["closed_omega"] = {{"max_d_omega", co.max_domega},
                               {"max_abs_sigma", co.max_abs_sigma},
                               {"omega_closed", co.omega_closed},
                               {"implication_holds", co.implication_holds}};
    r.checks_pass = co.implication_holds;
  } else if (name == "twins") {
    const TwinTheoremReport bar = thken_check(s, pts, tol.classification);
    const TwinTheoremReport hat = thcos_check(s, pts, tol.classification);
    for (const TwinKind kind : {TwinKind::Bar, TwinKind::Hat})
      for (Residual res : check_axioms(twin(s, kind), pts, tol.kernel).residuals) {
        res.name = to_string(kind) + ": " + res.name;
        r.residuals.push_back(res);
      }
    r.issues.insert(r.issues.end(), bar.issues.begin(), bar.issues.end());
    r.issues.insert(r.issues.end(), hat.issues.begin(), hat.issues.end());
    r.extra["beta_kenmotsu_twin"] = to_json(bar);
    r.extra["cosymplectic_twin"] = to_json(hat);
    r.checks_pass = bar.agree() && hat.agree();
  } else if (name == "deform") {
    const DeformationParams params{parse(c.f.value_or("1"))};
    check_positive(params, pts);
    const DerivedStructure d = deform(s, params);
    r.add(check_axioms(d, pts, tol.kernel));
    const DeformedType dt = deformed_type(s, params, pts, 10.0 * tol.kernel, tol.classification);
    r.add(dt.residuals);
    const NTildeReport nt = ntilde_identity_residual(s, params, pts, 200, c.seed, 10.0 * tol.kernel);
    r.add(nt.discrepancy);
    const CorollaryReport cg = corollary_gate(s, params, pts, tol.classification);
    const auto [am, as] = mean_stddev(dt.alpha_tilde);
    const auto [bm, bs] = mean_stddev(dt.beta_tilde);
    r.extra["f"] = params.f.to_string();
    r.extra["alpha_tilde"] = {{"mean", am}, {"stddev", as}};
    r.extra["beta_tilde"] = {{"mean", bm}, {"stddev", bs}};
    r.extra["gate"] = {{"holds", dt.gate_holds},
                       {"max_abs_sigma_minus_e_rho", dt.gate_max},
                       {"min_abs_sigma_minus_e_rho", dt.gate_min}};
    r.extra["corollary"] = to_string(cg.verdict);
    r.extra["ntilde_max_norm"] = nt.max_norm;
  } else if (name == "classify") {
    const ClassificationReport cl = classify(s, pts, tol.classification);
    r.issues = cl.issues;
    r.extra["classification"] = to_json(cl);
  }
  return r;
}

} // namespace detail

struct RunResult {
  nlohmann::json report;
  int exit_code = 0;
};

inline nlohmann::json report_header(const std::string& command, const SceneConfig& c) {
  return {{"schema_version", kSchemaVersion},
          {"command", command},
          {"seed", c.seed},
          {"samples", c.samples},
          {"tolerances",
           {{"kernel", c.tol.kernel}, {"classification", c.tol.classification}, {"failure_floor", c.tol.failure_floor}}},
          {"conventions", kConventionBanner}};
}

inline RunResult error_result(nlohmann::json report, const std::string& kind, const std::string& message) {
  report["error"] = {{"kind", kind}, {"message", message}};
  report["passed"] = false;
  report["exit_code"] = 2;
  return {std::move(report), 2};
}

/// Runs every requested suite. Exit code 0 when all pass, 1 on a suite
/// failure, 2 on a configuration or domain error.
inline RunResult run(const SceneConfig& c, const std::string& command = "check") {
  nlohmann::json report = report_header(command, c);
  try {
    const Scene sc = build_scene(c);
    report["source"] = sc.source;
    const ChartDomain& box = sc.structure.chart;
    report["box"] = {{"lo", to_json(box.lo)}, {"hi", to_json(box.hi)}};
    nlohmann::json suites = nlohmann::json::array();
    bool all = true;
    for (const auto& name : c.suites) {
      const SuiteResult r = detail::run_suite(name, sc, c);
      all = all && r.passed();
      suites.push_back(r.json());
    }
    report["suites"] = suites;
    report["passed"] = all;
    report["exit_code"] = all ? 0 : 1;
    return {std::move(report), all ? 0 : 1};
  } catch (const ConfigError& e) {
    return error_result(std::move(report), "config", e.what());
  } catch (const ParseError& e) {
    return error_result(std::move(report), "expression", e.what());
  } catch (const UnknownPreset& e) {
    return error_result(std::move(report), "preset", e.what());
  } catch (const InvalidParams& e) {
    return error_result(std::move(report), "domain", e.what());
  } catch (const NonPositiveF& e) {
    return error_result(std::move(report), "domain", e.what());
  } catch (const SingularMetric& e) {
    return error_result(std::move(report), "domain", e.what());
  } catch (const DegenerateCorner& e) {
    return error_result(std::move(report), "degenerate", e.what());
  } catch (const DomainError& e) {
    return error_result(std::move(report), "domain", e.what());
  }
}

// ---------------------------------------------------------------------------
// Best-effort search for sigma = e^rho within the family.

struct ScanEntry {
  FamilyParams params;
  double max_d_omega = 0.0;
  double min_gap = 0.0;  // min |sigma - e^rho|
  std::optional<Point> argmin;
  double max_abs_sigma = 0.0;
  std::size_t degenerate = 0;
};

/// Evaluates |sigma - e^rho| over the sample of each family. Never asserts.
inline std::vector<ScanEntry> scan_sigma(const std::vector<FamilyParams>& families, std::size_t samples,
                                         std::uint64_t seed) {
  std::vector<ScanEntry> out;
  for (const FamilyParams& params : families) {
    ScanEntry e;
    e.params = params;
    e.min_gap = std::numeric_limits<double>::infinity();
    const AcmStructure s = build_family(params);
    const auto pts = params.box.sample(samples, seed);
    const ClosedOmegaReport co = closed_omega_check(s, pts);
    e.max_d_omega = co.max_domega;
    for (const Point& p : pts) {
      try {
        const CornerFrame f = corner_frame(s, p);
        const double gap = std::fabs(f.sigma - f.e_rho);
        e.max_abs_sigma = std::max(e.max_abs_sigma, std::fabs(f.sigma));
        if (gap < e.min_gap) {
          e.min_gap = gap;
          e.argmin = p;
        }
      } catch (const std::runtime_error&) {
        ++e.degenerate;
      }
    }
    out.push_back(e);
  }
  return out;
}

/// Random corner families (kappa, mu free of x1) whose tau depends on x1, so d omega != 0 in general.
inline std::vector<FamilyParams> random_families(std::size_t budget, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const auto c = [&] {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", coef(rng));
    return std::string(buf);
  };
  std::vector<FamilyParams> out;
  for (std::size_t i = 0; i < budget; ++i) {
    const std::string tau = "exp(" + c() + "*x1*x2 + " + c() + "*x1*x3 + " + c() + "*x2 + " + c() + "*x3)";
    const std::string kappa = "exp(" + c() + "*x2 + " + c() + "*x3)";
    const std::string mu = "exp(" + c() + "*x2*x3 + " + c() + "*x3)";
    out.push_back(FamilyParams::from_strings(tau, kappa, mu));
  }
  return out;
}

inline nlohmann::json to_json(const std::vector<ScanEntry>& scan) {
  nlohmann::json entries = nlohmann::json::array();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : scan) {
    entries.push_back({{"tau", e.params.tau.to_string()},
                       {"kappa", e.params.kappa.to_string()},
                       {"mu", e.params.mu.to_string()},
                       {"max_d_omega", e.max_d_omega},
                       {"max_abs_sigma", e.max_abs_sigma},
                       {"min_abs_sigma_minus_e_rho", e.min_gap},
                       {"argmin", e.argmin ? to_json(*e.argmin) : nlohmann::json(nullptr)},
                       {"degenerate_points", e.degenerate}});
    best = std::min(best, e.min_gap);
  }
  nlohmann::json j{{"entries", entries}};
  j["min_abs_sigma_minus_e_rho"] = scan.empty() ? nlohmann::json(nullptr) : nlohmann::json(best);
  return j;
}

} // namespace cornerkit

#endif
