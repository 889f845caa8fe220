// Command-line front end: design, analyze, simulate, identify.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "report.hpp"
#include "rfob/config.hpp"
#include "rfob/csv.hpp"
#include "rfob/design.hpp"
#include "rfob/engine.hpp"
#include "rfob/loop_model.hpp"

namespace {

using namespace rfob;
using report::json;

enum Exit : int { kOk = 0, kUsage = 1, kConfig = 2, kInfeasible = 3, kDiverged = 4 };

struct Options {
  std::string config;
  std::string out;
  std::string sweep;
  bool sweep_log = false;
  std::optional<std::uint64_t> seed;
  std::string format = "text";
};

struct SweepPoint {
  std::string section, key;
  double value = 0.0;
};

// KEY=START:STOP:N with KEY = section.key.
std::vector<SweepPoint> parse_sweep(const std::string& spec, bool log_spacing) {
  const auto eq = spec.find('=');
  const auto dot = spec.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("sweep: expected section.key=START:STOP:N, got '" + spec + "'");
  }
  const std::string section = spec.substr(0, dot), key = spec.substr(dot + 1, eq - dot - 1);
  const std::string range = spec.substr(eq + 1);
  const auto c1 = range.find(':'), c2 = range.rfind(':');
  if (c1 == std::string::npos || c1 == c2) throw ConfigError("sweep: range must be START:STOP:N");
  double start = 0, stop = 0;
  long n = 0;
  try {
    start = std::stod(range.substr(0, c1));
    stop = std::stod(range.substr(c1 + 1, c2 - c1 - 1));
    n = std::stol(range.substr(c2 + 1));
  } catch (const std::exception&) {
    throw ConfigError("sweep: range must be START:STOP:N");
  }
  if (n < 1) throw ConfigError("sweep: N must be >= 1");
  if (log_spacing && !(start > 0 && stop > 0)) throw ConfigError("sweep: log spacing needs positive bounds");
  std::vector<SweepPoint> pts;
  for (long i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    const double v = log_spacing ? start * std::pow(stop / start, t) : start + t * (stop - start);
    pts.push_back({section, key, v});
  }
  return pts;
}

std::vector<std::pair<std::optional<double>, ConfigDocument>> documents(const Options& o) {
  const ConfigDocument base = ConfigDocument::load(o.config);
  std::vector<std::pair<std::optional<double>, ConfigDocument>> out;
  if (o.sweep.empty()) {
    out.emplace_back(std::nullopt, base);
    return out;
  }
  for (const auto& p : parse_sweep(o.sweep, o.sweep_log)) {
    ConfigDocument d = base;
    d.set(p.section, p.key, fmt::format("{:.17g}", p.value));
    out.emplace_back(p.value, std::move(d));
  }
  return out;
}

void emit(const Options& o, const json& j, const std::string& text) {
  if (o.format == "json") std::cout << j.dump(2) << '\n';
  else std::cout << text;
}

int cmd_design(const Options& o) {
  int code = kOk;
  json all = json::array();
  std::string text;
  for (const auto& [value, doc] : documents(o)) {
    const DesignInputs in = design_inputs_from(doc);
    const DesignResult d = design_for(in.M_m, in.D_env, in.K_env, in.g_v, in.specs);
    std::optional<BandwidthSplit> split;
    if (d.feasible) split = split_alpha_g(d, in.alpha, in.g_v);
    else code = kInfeasible;
    json j = report::design_json(d, split);
    if (value) {
      j["sweep_value"] = *value;
      text += fmt::format("{} = {:.9g}\n", o.sweep.substr(0, o.sweep.find('=')), *value);
    }
    all.push_back(j);
    text += report::design_text(d, split) + (value ? "\n" : "");
  }
  emit(o, o.sweep.empty() ? all.front() : all, text);
  return code;
}

int cmd_analyze(const Options& o) {
  json all = json::array();
  std::string text;
  for (const auto& [value, doc] : documents(o)) {
    const Scenario sc = scenario_from(doc);
    if (sc.env.empty()) throw ConfigError("config: environment has neither damping nor stiffness");
    const StabilityReport r = analyze_loop(sc.plant, sc.dob, sc.rfob, sc.env, sc.C_f);
    json j = report::analysis_json(r);
    if (value) {
      j["sweep_value"] = *value;
      text += fmt::format("{} = {:.9g}\n", o.sweep.substr(0, o.sweep.find('=')), *value);
    }
    all.push_back(j);
    text += report::analysis_text(r) + (value ? "\n" : "");
  }
  emit(o, o.sweep.empty() ? all.front() : all, text);
  return kOk;
}

int cmd_simulate(const Options& o, bool identify) {
  int code = kOk;
  json all = json::array();
  std::string text;
  const auto docs = documents(o);
  if (!o.out.empty() && docs.size() > 1) throw ConfigError("simulate: --out cannot be combined with --sweep");
  for (const auto& [value, doc] : docs) {
    Scenario sc = scenario_from(doc);
    if (o.seed) sc.seed = *o.seed;
    const RunResult r = run(sc);
    if (!o.out.empty()) {
      std::ofstream f(o.out, std::ios::binary);
      if (!f) throw ConfigError("cannot write " + o.out);
      if (identify) write_identify_csv(f, r.rows);
      else write_csv(f, r.rows);
    }
    json j = identify ? report::identify_json(sc, r.summary) : report::summary_json(sc, r.summary);
    if (value) {
      j["sweep_value"] = *value;
      text += fmt::format("{} = {:.9g}\n", o.sweep.substr(0, o.sweep.find('=')), *value);
    }
    all.push_back(j);
    text += identify ? report::identify_text(sc, r.summary) : report::summary_text(sc, r.summary);
    if (r.summary.diverged) code = kDiverged;
  }
  emit(o, o.sweep.empty() ? all.front() : all, text);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reaction-force-observer force control: gain design, loop analysis, simulation"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "INI configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--sweep", o.sweep, "Sweep one key: section.key=START:STOP:N");
    sub->add_flag("--sweep-log", o.sweep_log, "Geometric spacing for --sweep");
    sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"text", "json"}));
  };
  auto* design = app.add_subcommand("design", "Compute alpha*g and C_f for the configured environment");
  auto* analyze = app.add_subcommand("analyze", "Stability report for the configured loop");
  auto* simulate = app.add_subcommand("simulate", "Run the closed-loop simulation");
  auto* identify = app.add_subcommand("identify", "Run the simulation and report identified parameters");
  for (auto* sub : {design, analyze, simulate, identify}) add_common(sub);
  for (auto* sub : {simulate, identify}) {
    sub->add_option("--out", o.out, "CSV output path");
    sub->add_option("--seed", o.seed, "Noise seed (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (design->parsed()) return cmd_design(o);
    if (analyze->parsed()) return cmd_analyze(o);
    if (simulate->parsed()) return cmd_simulate(o, false);
    if (identify->parsed()) return cmd_simulate(o, true);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kConfig;
  } catch (const std::domain_error& e) {
    std::cerr << e.what() << '\n';
    return kInfeasible;
  }
  return kUsage;
}
