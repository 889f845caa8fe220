#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rfob/design.hpp"
#include "rfob/engine.hpp"

namespace rfob {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Allowed keys per section; units are part of the key name. Sections named
// phase1, phase2, ... use the "phase" list and run in numeric order.
inline const std::map<std::string, std::vector<std::string>>& config_schema() {
  static const std::map<std::string, std::vector<std::string>> schema{
      {"plant", {"mass_kg", "thrust_N_per_A", "disturbance_N"}},
      {"friction", {"viscous_Ns_per_m", "coulomb_N", "eps_m_per_s"}},
      {"environment",
       {"damping_Ns_per_m", "stiffness_N_per_m", "position_m", "velocity_m_per_s", "contact"}},
      {"dob",
       {"nominal_mass_kg", "nominal_thrust_N_per_A", "bandwidth_rad_s", "velocity_cutoff_rad_s",
        "ideal_velocity"}},
      {"rfob",
       {"mass_kg", "thrust_N_per_A", "bandwidth_rad_s", "viscous_Ns_per_m", "coulomb_N",
        "eps_m_per_s", "disturbance_N"}},
      {"design",
       {"alpha", "xi_damping", "gamma", "eta_stiffness", "xi_stiffness", "eta_star", "eta_free",
        "xi", "k"}},
      {"identify",
       {"forgetting_nc", "forgetting_c", "gamma0_nc", "gamma0_c", "delta0_nc", "delta0_c",
        "lower_nc", "upper_nc", "lower_c", "upper_c", "covariance_cap", "cutoff_rad_s",
        "contact_on_N", "contact_off_N", "dwell_steps", "latch"}},
      {"scenario",
       {"dt_s", "force_gain", "kp", "kv", "adaptation", "redesign_every", "noise_std_m_per_s",
        "seed", "initial_position_m", "initial_velocity_m_per_s", "initial_disturbance_estimate_N",
        "position_limit_m", "velocity_limit_m_per_s"}},
      {"phase",
       {"kind", "duration_s", "offset", "amp", "freq_hz", "amp2", "freq2_hz", "ramp_s",
        "identify"}},
  };
  return schema;
}

inline bool is_phase_section(const std::string& name) {
  static const std::regex re("phase([1-9][0-9]*)");
  return std::regex_match(name, re);
}

class ConfigDocument {
 public:
  using ptree = boost::property_tree::ptree;

  static ConfigDocument parse(const std::string& text) {
    ConfigDocument doc;
    std::istringstream in(text);
    try {
      boost::property_tree::ini_parser::read_ini(in, doc.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(std::string("config: ") + e.message() + " at line " +
                        std::to_string(e.line()));
    }
    doc.check_keys();
    return doc;
  }

  static ConfigDocument load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  std::string serialize() const {
    std::ostringstream out;
    boost::property_tree::ini_parser::write_ini(out, tree_);
    return out.str();
  }

  bool has(const std::string& section, const std::string& key) const {
    return static_cast<bool>(tree_.get_child_optional(ptree::path_type(section + "/" + key, '/')));
  }

  bool has_section(const std::string& section) const {
    return static_cast<bool>(tree_.get_child_optional(ptree::path_type(section, '/')));
  }

  std::string text(const std::string& section, const std::string& key) const {
    const auto v = tree_.get_optional<std::string>(ptree::path_type(section + "/" + key, '/'));
    if (!v) throw ConfigError("config: missing required key [" + section + "] " + key);
    return trim(*v);
  }

  std::string text_or(const std::string& section, const std::string& key,
                      const std::string& fallback) const {
    return has(section, key) ? text(section, key) : fallback;
  }

  double number(const std::string& section, const std::string& key) const {
    return to_number(text(section, key), section, key);
  }

  double number_or(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? number(section, key) : fallback;
  }

  bool flag_or(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = text(section, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: [" + section + "] " + key + " expects true or false, got '" + v + "'");
  }

  std::vector<double> list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(text(section, key));
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_number(trim(item), section, key));
    return out;
  }

  /// Sets a value; the key must be part of the schema.
  void set(const std::string& section, const std::string& key, const std::string& value) {
    check_key(section, key);
    tree_.put(ptree::path_type(section + "/" + key, '/'), value);
  }

  std::vector<std::string> phase_sections() const {
    std::vector<std::pair<int, std::string>> found;
    for (const auto& [name, _] : tree_)
      if (is_phase_section(name)) found.emplace_back(std::stoi(name.substr(5)), name);
    std::sort(found.begin(), found.end());
    std::vector<std::string> out;
    for (auto& f : found) out.push_back(f.second);
    return out;
  }

  friend bool operator==(const ConfigDocument& a, const ConfigDocument& b) {
    return a.tree_ == b.tree_;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
  }

  static double to_number(const std::string& v, const std::string& section, const std::string& key) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
      throw ConfigError("config: [" + section + "] " + key + " expects a number, got '" + v + "'");
    }
    return out;
  }

  static void check_key(const std::string& section, const std::string& key) {
    const auto& schema = config_schema();
    const std::string lookup = is_phase_section(section) ? "phase" : section;
    const auto it = schema.find(lookup);
    if (lookup == "phase" && !is_phase_section(section)) {
      throw ConfigError("config: unknown section [" + section + "]");
    }
    if (it == schema.end()) throw ConfigError("config: unknown section [" + section + "]");
    if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
      throw ConfigError("config: unknown key [" + section + "] " + key);
    }
  }

  void check_keys() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty() && !body.data().empty()) {
        throw ConfigError("config: key '" + section + "' outside any section");
      }
      for (const auto& [key, _] : body) check_key(section, key);
    }
  }

  ptree tree_;
};

// ---------------------------------------------------------------------------
// Typed views.

inline EnvImpedance env_from(const ConfigDocument& d) {
  EnvImpedance env{d.number("environment", "damping_Ns_per_m"),
                   d.number("environment", "stiffness_N_per_m"),
                   d.number_or("environment", "position_m", 0.0),
                   d.number_or("environment", "velocity_m_per_s", 0.0)};
  try {
    env.validate(false);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return env;
}

inline DesignSpecs design_specs_from(const ConfigDocument& d) {
  DesignSpecs s;
  s.damping.xi = d.number_or("design", "xi_damping", s.damping.xi);
  s.damping.gamma = d.number_or("design", "gamma", s.damping.gamma);
  s.stiffness.eta = d.number_or("design", "eta_stiffness", s.stiffness.eta);
  s.stiffness.xi = d.number_or("design", "xi_stiffness", s.stiffness.xi);
  s.damping_stiffness.eta_star = d.number_or("design", "eta_star", s.damping_stiffness.eta_star);
  s.damping_stiffness.eta_free = d.number_or("design", "eta_free", s.damping_stiffness.eta_free);
  if (d.has("design", "xi")) s.damping_stiffness.xi = d.number("design", "xi");
  if (d.has("design", "k")) s.damping_stiffness.k = d.number("design", "k");
  return s;
}

struct DesignInputs {
  double M_m = 0.0, D_env = 0.0, K_env = 0.0, g_v = 0.0;
  double alpha = 1.0;
  DesignSpecs specs;
};

inline DesignInputs design_inputs_from(const ConfigDocument& d) {
  DesignInputs in;
  in.M_m = d.number("plant", "mass_kg");
  const EnvImpedance env = env_from(d);
  if (env.empty()) throw ConfigError("config: environment has neither damping nor stiffness");
  in.D_env = env.D_env;
  in.K_env = env.K_env;
  in.g_v = d.number("dob", "velocity_cutoff_rad_s");
  in.alpha = d.number_or("design", "alpha", 1.0);
  in.specs = design_specs_from(d);
  return in;
}

namespace detail {

template <int N>
Vec<N> vec_or(const ConfigDocument& d, const std::string& key, const Vec<N>& fallback) {
  if (!d.has("identify", key)) return fallback;
  const auto v = d.list("identify", key);
  if (static_cast<int>(v.size()) != N) {
    throw ConfigError("config: [identify] " + key + " expects " + std::to_string(N) + " values");
  }
  Vec<N> out;
  for (int i = 0; i < N; ++i) out(i) = v[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace detail

inline Scenario scenario_from(const ConfigDocument& d) {
  Scenario sc;
  sc.plant = {d.number("plant", "mass_kg"), d.number("plant", "thrust_N_per_A"),
              d.number_or("plant", "disturbance_N", 0.0)};
  sc.friction = {d.number_or("friction", "viscous_Ns_per_m", 0.0),
                 d.number_or("friction", "coulomb_N", 0.0),
                 d.number_or("friction", "eps_m_per_s", 1e-3)};
  sc.env = env_from(d);
  const std::string contact = d.text_or("environment", "contact", "unilateral");
  if (contact == "unilateral") sc.contact_model = ContactModel::Unilateral;
  else if (contact == "bilateral") sc.contact_model = ContactModel::Bilateral;
  else throw ConfigError("config: [environment] contact must be unilateral or bilateral");

  sc.dob = {d.number("dob", "nominal_mass_kg"), d.number("dob", "nominal_thrust_N_per_A"),
            d.number("dob", "bandwidth_rad_s"), d.number("dob", "velocity_cutoff_rad_s")};
  sc.ideal_velocity = d.flag_or("dob", "ideal_velocity", false);
  sc.rfob.M_hat = d.number("rfob", "mass_kg");
  sc.rfob.K_F_hat = d.number("rfob", "thrust_N_per_A");
  sc.rfob.g_RFOB = d.number("rfob", "bandwidth_rad_s");
  sc.rfob.friction = {d.number_or("rfob", "viscous_Ns_per_m", 0.0),
                      d.number_or("rfob", "coulomb_N", 0.0),
                      d.number_or("rfob", "eps_m_per_s", sc.friction.eps)};
  sc.rfob.F_d_hat = d.number_or("rfob", "disturbance_N", 0.0);

  sc.dt = d.number("scenario", "dt_s");
  sc.C_f = d.number("scenario", "force_gain");
  sc.K_P = d.number_or("scenario", "kp", sc.K_P);
  sc.K_V = d.number_or("scenario", "kv", sc.K_V);
  const std::string adapt = d.text_or("scenario", "adaptation", "off");
  if (adapt == "off") sc.adaptation = Adaptation::Off;
  else if (adapt == "online") sc.adaptation = Adaptation::Online;
  else if (adapt == "offline") sc.adaptation = Adaptation::Offline;
  else throw ConfigError("config: [scenario] adaptation must be off, online or offline");
  sc.redesign_every = static_cast<int>(d.number_or("scenario", "redesign_every", sc.redesign_every));
  sc.noise_std = d.number_or("scenario", "noise_std_m_per_s", 0.0);
  sc.seed = static_cast<std::uint64_t>(d.number_or("scenario", "seed", 1.0));
  sc.initial = {d.number_or("scenario", "initial_position_m", 0.0),
                d.number_or("scenario", "initial_velocity_m_per_s", 0.0)};
  sc.initial_F_dis_hat = d.number_or("scenario", "initial_disturbance_estimate_N", 0.0);
  sc.x_limit = d.number_or("scenario", "position_limit_m", sc.x_limit);
  sc.xdot_limit = d.number_or("scenario", "velocity_limit_m_per_s", sc.xdot_limit);
  sc.design = design_specs_from(d);

  auto& id = sc.identify;
  id.mu_nc = d.number_or("identify", "forgetting_nc", id.mu_nc);
  id.mu_c = d.number_or("identify", "forgetting_c", id.mu_c);
  id.gamma0_nc = detail::vec_or<4>(d, "gamma0_nc", id.gamma0_nc);
  id.gamma0_c = detail::vec_or<3>(d, "gamma0_c", id.gamma0_c);
  if (d.has("identify", "delta0_nc")) id.delta0_nc = detail::vec_or<4>(d, "delta0_nc", Vec<4>::Zero());
  id.delta0_c = detail::vec_or<3>(d, "delta0_c", id.delta0_c);
  id.lower_nc = detail::vec_or<4>(d, "lower_nc", id.lower_nc);
  id.upper_nc = detail::vec_or<4>(d, "upper_nc", id.upper_nc);
  id.lower_c = detail::vec_or<3>(d, "lower_c", id.lower_c);
  id.upper_c = detail::vec_or<3>(d, "upper_c", id.upper_c);
  id.cap_factor = d.number_or("identify", "covariance_cap", id.cap_factor);
  id.g_id = d.number_or("identify", "cutoff_rad_s", id.g_id);
  id.thresholds.on = d.number_or("identify", "contact_on_N", id.thresholds.on);
  id.thresholds.off = d.number_or("identify", "contact_off_N", id.thresholds.off);
  id.thresholds.dwell = static_cast<int>(d.number_or("identify", "dwell_steps", id.thresholds.dwell));
  id.latch = d.flag_or("identify", "latch", id.latch);

  for (const auto& name : d.phase_sections()) {
    Phase p;
    const std::string kind = d.text(name, "kind");
    if (kind == "force") p.kind = PhaseKind::Force;
    else if (kind == "position") p.kind = PhaseKind::Position;
    else throw ConfigError("config: [" + name + "] kind must be force or position");
    p.duration = d.number(name, "duration_s");
    p.ref = {d.number_or(name, "offset", 0.0), d.number_or(name, "amp", 0.0),
             d.number_or(name, "freq_hz", 0.0), d.number_or(name, "amp2", 0.0),
             d.number_or(name, "freq2_hz", 0.0), d.number_or(name, "ramp_s", 0.0)};
    p.identify = d.flag_or(name, "identify", false);
    sc.phases.push_back(p);
  }

  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return sc;
}

}  // namespace rfob
