// Command-line driver: check | classify | twin | deform | scan.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "cornerkit/scene.hpp"

namespace {

struct Options {
  std::string preset;
  std::string config;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string suites;
  std::optional<std::string> f;
  std::size_t budget = 20;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cornerkit::ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string default_suites(const std::string& command) {
  if (command == "classify") return "classify";
  if (command == "twin") return "twins";
  if (command == "deform") return "deform";
  return "axioms,corner,frame,forms";
}

cornerkit::SceneConfig scene_from(const Options& o, const std::string& command) {
  cornerkit::SceneConfig c;
  if (!o.config.empty()) c = cornerkit::parse_scene(read_file(o.config));
  else c.suites = cornerkit::split_suites(default_suites(command));
  if (!o.preset.empty()) c.source = o.preset;
  if (o.samples) c.samples = *o.samples;
  if (o.seed) c.seed = *o.seed;
  if (!o.suites.empty()) c.suites = cornerkit::split_suites(o.suites);
  if (o.f) c.f = *o.f;
  return c;
}

void print_summary(const nlohmann::json& report) {
  if (report.contains("error")) {
    std::cerr << "error (" << report["error"]["kind"].get<std::string>()
              << "): " << report["error"]["message"].get<std::string>() << "\n";
    return;
  }
  if (!report.contains("suites")) return;
  for (const auto& s : report["suites"]) {
    double worst = 0.0;
    for (const auto& r : s["residuals"])
      if (r["max"].is_number()) worst = std::max(worst, r["max"].get<double>());
    std::fprintf(stderr, "%-9s %s  worst residual %.3e  issues %zu\n", s["suite"].get<std::string>().c_str(),
                 s["passed"].get<bool>() ? "PASS" : "FAIL", worst, s["issues"].size());
  }
}

int emit(const nlohmann::json& report, const std::string& out) {
  const std::string text = report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(out);
  if (!f) {
    std::cerr << "cannot write '" << out << "'\n";
    return 2;
  }
  f << text;
  return 0;
}

int run_scan(const Options& o) {
  nlohmann::json report{{"schema_version", cornerkit::kSchemaVersion},
                        {"command", "scan"},
                        {"seed", o.seed.value_or(0)},
                        {"conventions", cornerkit::kConventionBanner}};
  try {
    std::vector<cornerkit::FamilyParams> families;
    if (!o.preset.empty()) {
      families.push_back(cornerkit::preset(o.preset).params);
    } else if (!o.config.empty()) {
      const cornerkit::SceneConfig c = cornerkit::parse_scene(read_file(o.config));
      const auto* fs = std::get_if<cornerkit::FamilySource>(&c.source);
      if (!fs) throw cornerkit::ConfigError("scan needs a family source");
      families.push_back(cornerkit::FamilyParams::from_strings(fs->tau, fs->kappa, fs->mu));
    } else {
      families = cornerkit::random_families(o.budget, o.seed.value_or(0));
    }
    const auto scan = cornerkit::scan_sigma(families, o.samples.value_or(cornerkit::kDefaultSamples), o.seed.value_or(0));
    report["scan"] = cornerkit::to_json(scan);
    report["exit_code"] = 0;
  } catch (const std::runtime_error& e) {
    report["error"] = {{"kind", "config"}, {"message", e.what()}};
    report["exit_code"] = 2;
    print_summary(report);
    emit(report, o.out);
    return 2;
  }
  return emit(report, o.out);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Residual checks for almost contact metric structures on a 3D chart"};
  app.require_subcommand(1);
  Options o;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--preset", o.preset, "named structure: family:A .. family:D");
    sub->add_option("--config", o.config, "JSON scene file")->check(CLI::ExistingFile);
    sub->add_option("--samples", o.samples, "number of sampled points")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "sampling seed");
    sub->add_option("--out", o.out, "write the JSON report here instead of stdout");
    sub->add_option("--suites", o.suites, "comma-separated subset of axioms,corner,frame,forms,twins,deform,classify");
    sub->add_option("--f", o.f, "deformation function f > 0");
  };
  std::string command;
  const std::pair<const char*, const char*> commands[] = {
      {"check", "axioms, corner condition, frame and form identities"},
      {"classify", "normality and Olszak functions"},
      {"twin", "the two twin structures and their classification"},
      {"deform", "the f-deformed structure and its structure equations"},
      {"scan", "sample |sigma - e^rho| over random corner families"},
  };
  for (const auto& [name, about] : commands) {
    CLI::App* sub = app.add_subcommand(name, about);
    add_common(sub);
    if (std::string(name) == "scan") sub->add_option("--budget", o.budget, "number of random families to scan");
    sub->callback([&command, name] { command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Error& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (command == "scan") return run_scan(o);

  cornerkit::RunResult result;
  try {
    result = cornerkit::run(scene_from(o, command), command);
  } catch (const cornerkit::ConfigError& e) {
    result = cornerkit::error_result(nlohmann::json{{"schema_version", cornerkit::kSchemaVersion}, {"command", command}},
                                     "config", e.what());
  }
  print_summary(result.report);
  const int io = emit(result.report, o.out);
  return io != 0 ? io : result.exit_code;
}
