#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "json.hpp"
#include "rfob/config.hpp"
#include "rfob/csv.hpp"
#include "rfob/design.hpp"
#include "rfob/engine.hpp"
#include "rfob/loop_model.hpp"

namespace rfob::report {

using nlohmann::json;

inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json coeffs(const Polynomial& p) {
  json a = json::array();
  for (double c : p.coeffs()) a.push_back(num(c));
  return a;
}

inline json roots(const std::vector<cdouble>& rs) {
  json a = json::array();
  for (const auto& r : rs) a.push_back({{"re", num(r.real())}, {"im", num(r.imag())}});
  return a;
}

inline std::string poly_text(const Polynomial& p) {
  std::string out;
  const int n = p.degree();
  for (int i = 0; i <= n; ++i) {
    const double c = p.coeffs()[static_cast<std::size_t>(i)];
    const int pw = n - i;
    out += (i == 0 ? "" : (c < 0 ? " - " : " + "));
    out += fmt::format("{:.9g}", i == 0 ? c : std::abs(c));
    if (pw >= 1) out += " s";
    if (pw >= 2) out += fmt::format("^{}", pw);
  }
  return out.empty() ? "0" : out;
}

// ---------------------------------------------------------------------------

inline json design_json(const DesignResult& d, std::optional<BandwidthSplit> split) {
  json j{{"env_class", to_string(d.env_class)},
         {"inputs", {{"M_m_kg", d.M_m}, {"D_env_Ns_m", d.D_env}, {"K_env_N_m", d.K_env}, {"g_v_rad_s", d.g_v}}},
         {"feasible", d.feasible},
         {"degenerate", d.degenerate},
         {"failure", d.failure},
         {"xi_minus", num(d.xi_minus)},
         {"xi_plus", num(d.xi_plus)},
         {"psi", num(d.psi)},
         {"R", num(d.R)},
         {"xi_star", num(d.xi_star)},
         {"gamma", num(d.gamma)},
         {"eta", num(d.eta)},
         {"k", num(d.k)},
         {"xi", num(d.xi)},
         {"w_n_rad_s", num(d.w_n)},
         {"p_rad_s", num(d.p)},
         {"alpha_g_rad_s", num(d.alpha_g)},
         {"C_f", num(d.C_f)},
         {"target_poly", coeffs(d.target)},
         {"achieved_poly", coeffs(d.achieved)},
         {"notes", d.notes}};
  json cs = json::array();
  for (const auto& c : d.constraints)
    cs.push_back({{"name", c.name}, {"lhs", num(c.lhs)}, {"rhs", num(c.rhs)}, {"pass", c.pass}});
  j["constraints"] = cs;
  if (split) {
    j["g_DOB_rad_s"] = split->g_DOB;
    j["g_RFOB_rad_s"] = split->g_RFOB;
    j["dob_bound_margin_rad_s"] = split->bound.margin;
  }
  return j;
}

inline std::string design_text(const DesignResult& d, std::optional<BandwidthSplit> split) {
  std::string s;
  s += fmt::format("environment   {}  (M = {:.9g} kg, D = {:.9g} Ns/m, K = {:.9g} N/m, g_v = {:.9g} rad/s)\n",
                   to_string(d.env_class), d.M_m, d.D_env, d.K_env, d.g_v);
  s += fmt::format("feasible      {}{}\n", d.feasible ? "yes" : "no",
                   d.failure.empty() ? "" : "  (" + d.failure + ")");
  if (d.degenerate) s += "degenerate    third pole at the origin\n";
  s += fmt::format("xi_minus      {:.9g}\nxi_plus       {:.9g}\npsi           {:.9g}\nR             {:.9g}\n",
                   d.xi_minus, d.xi_plus, d.psi, d.R);
  s += fmt::format("gamma         {:.9g}\neta           {:.9g}\nk             {:.9g}\nxi            {:.9g}\n",
                   d.gamma, d.eta, d.k, d.xi);
  s += fmt::format("w_n           {:.9g} rad/s\np             {:.9g} rad/s\nalpha_g       {:.9g} rad/s\nC_f           {:.9g}\n",
                   d.w_n, d.p, d.alpha_g, d.C_f);
  if (split) {
    s += fmt::format("g_DOB = g_RFOB  {:.9g} rad/s  (bound margin {:.9g} rad/s)\n", split->g_DOB,
                     split->bound.margin);
  }
  s += "constraints\n";
  for (const auto& c : d.constraints)
    s += fmt::format("  [{}] {}   ({:.9g} vs {:.9g})\n", c.pass ? "ok" : "FAIL", c.name, c.lhs, c.rhs);
  s += "target        " + poly_text(d.target) + "\n";
  s += "achieved      " + poly_text(d.achieved) + "\n";
  for (const auto& n : d.notes) s += "note          " + n + "\n";
  return s;
}

// ---------------------------------------------------------------------------

inline json analysis_json(const StabilityReport& r) {
  return {{"alpha", r.ratios.alpha},
          {"beta", r.ratios.beta},
          {"beta_below_alpha", r.beta_below_alpha},
          {"phi_poly", coeffs(r.phi.poly)},
          {"phi_roots", roots(r.rhp.roots)},
          {"rhp_zero", r.rhp.has_rhp},
          {"marginal_zero", r.rhp.marginal},
          {"open_loop_num", coeffs(r.open_loop.num)},
          {"open_loop_den", coeffs(r.open_loop.den)},
          {"relative_degree", r.open_loop.relative_degree()},
          {"asymptotes_deg", r.asymptotes},
          {"closed_loop_poly", coeffs(r.closed_loop)},
          {"closed_loop_poles", roots(r.closed_loop_poles)},
          {"closed_loop_stable", r.closed_loop_stable},
          {"dob_bound_pass", r.dob_bound.pass},
          {"dob_bound_margin_rad_s", r.dob_bound.margin},
          {"dob_sensitivity_w_n_rad_s", r.dob_sensitivity.w_n},
          {"dob_sensitivity_xi", r.dob_sensitivity.xi}};
}

inline std::string analysis_text(const StabilityReport& r) {
  std::string s;
  s += fmt::format("alpha         {:.9g}\nbeta          {:.9g}\n", r.ratios.alpha, r.ratios.beta);
  if (r.beta_below_alpha) s += "WARNING       beta < alpha: identified mass too large for stable force control\n";
  s += "phi(s)        " + poly_text(r.phi.poly) + "\n";
  s += "phi roots    ";
  for (const auto& z : r.rhp.roots) s += fmt::format(" ({:.9g}, {:.9g})", z.real(), z.imag());
  s += fmt::format("\nRHP zero      {}{}\n", r.rhp.has_rhp ? "yes" : "no", r.rhp.marginal ? " (root on imaginary axis)" : "");
  s += fmt::format("rel. degree   {}\nasymptotes   ", r.open_loop.relative_degree());
  for (double a : r.asymptotes) s += fmt::format(" {:.9g}", a);
  s += " deg\nclosed loop   " + poly_text(r.closed_loop) + "\n";
  if (!r.closed_loop_poles.empty()) {
    s += "poles        ";
    for (const auto& p : r.closed_loop_poles) s += fmt::format(" ({:.9g}, {:.9g})", p.real(), p.imag());
    s += "\n";
  }
  s += fmt::format("stable        {}\n", r.closed_loop_stable ? "yes" : "no");
  s += fmt::format("DOB bound     {}  (margin {:.9g} rad/s, sensitivity w_n {:.9g} rad/s, xi {:.9g})\n",
                   r.dob_bound.pass ? "pass" : "FAIL", r.dob_bound.margin, r.dob_sensitivity.w_n,
                   r.dob_sensitivity.xi);
  return s;
}

// ---------------------------------------------------------------------------

inline json summary_json(const Scenario& sc, const Summary& s) {
  json phases = json::array();
  for (const auto& p : s.phases) {
    phases.push_back({{"index", p.index + 1},
                      {"kind", to_string(p.kind)},
                      {"t_start_s", p.t_start},
                      {"t_end_s", p.t_end},
                      {"steady_state_error", num(p.steady_state_error)},
                      {"settling_time_s", num(p.settling_time)},
                      {"max_rfob_error_N", p.max_rfob_error},
                      {"mean_rfob_error_N", p.mean_rfob_error},
                      {"tail_rfob_error_N", p.tail_rfob_error},
                      {"tail_force_error_N", p.tail_force_error}});
  }
  json audit = json::array();
  for (const auto& a : s.audit) {
    audit.push_back({{"t_s", a.t}, {"applied", a.applied}, {"reason", a.reason}, {"M_hat", num(a.M_hat)},
                     {"D_hat", num(a.D_hat)}, {"K_hat", num(a.K_hat)}, {"alpha_g", num(a.alpha_g)},
                     {"C_f", num(a.C_f)}, {"g", num(a.g)}});
  }
  auto vec = [](const auto& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
    return a;
  };
  return {{"csv_schema_version", kCsvSchemaVersion},
          {"adaptation", to_string(sc.adaptation)},
          {"steps", s.steps},
          {"diverged", s.diverged},
          {"divergence_row", s.divergence_row ? json(*s.divergence_row) : json(nullptr)},
          {"divergence_reason", s.divergence_reason},
          {"first_contact_s", num(s.first_contact_time)},
          {"oscillation_metric_Ns", num(s.oscillation_metric)},
          {"phases", phases},
          {"final_nc", vec(s.final_nc)},
          {"final_c", vec(s.final_c)},
          {"gamma_nc", vec(s.gamma_nc)},
          {"gamma_c", vec(s.gamma_c)},
          {"nc_updates", s.nc_updates},
          {"c_updates", s.c_updates},
          {"audit", audit}};
}

inline std::string summary_text(const Scenario& sc, const Summary& s) {
  std::string out;
  out += fmt::format("adaptation    {}\nsteps         {}\n", to_string(sc.adaptation), s.steps);
  if (s.diverged) {
    out += fmt::format("DIVERGED      row {} ({})\n", s.divergence_row.value_or(0), s.divergence_reason);
  }
  out += fmt::format("first contact {:.9g} s\noscillation   {:.9g} N s\n", s.first_contact_time,
                     s.oscillation_metric);
  for (const auto& p : s.phases) {
    out += fmt::format(
        "phase {} {:<8} [{:.6g}, {:.6g}] s  ss error {:.6g}  settling {:.6g} s  RFOB error max {:.6g} N mean {:.6g} N tail {:.6g} N  true force error {:.6g} N\n",
        p.index + 1, to_string(p.kind), p.t_start, p.t_end, p.steady_state_error, p.settling_time,
        p.max_rfob_error, p.mean_rfob_error, p.tail_rfob_error, p.tail_force_error);
  }
  out += fmt::format("non-contact   M {:.9g} kg  k_vsc {:.9g} Ns/m  k_clmb {:.9g} N  F_d {:.9g} N  ({} updates)\n",
                     s.final_nc(0), s.final_nc(1), s.final_nc(2), s.final_nc(3), s.nc_updates);
  out += fmt::format("contact       D {:.9g} Ns/m  K {:.9g} N/m  offset {:.9g} N  ({} updates)\n",
                     s.final_c(0), s.final_c(1), s.final_c(2), s.c_updates);
  std::size_t applied = 0;
  for (const auto& a : s.audit) applied += a.applied ? 1 : 0;
  out += fmt::format("redesigns     {} attempted, {} applied\n", s.audit.size(), applied);
  return out;
}

// ---------------------------------------------------------------------------

struct EstimateLine {
  std::string name;
  double estimate = 0.0;
  double truth = 0.0;
  bool unidentifiable = false;
  long updates = 0;

  double rel_error() const {
    return truth != 0.0 ? std::abs(estimate - truth) / std::abs(truth) : std::abs(estimate - truth);
  }
};

inline std::vector<EstimateLine> estimate_lines(const Scenario& sc, const Summary& s) {
  auto unid = [](double g, double g0) { return g >= 0.5 * g0; };
  const double offset = 0.0 - (sc.env.D_env * sc.env.xdot_env + sc.env.K_env * sc.env.x_env);
  return {
      {"M_m_kg", s.final_nc(0), sc.plant.M_m, unid(s.gamma_nc(0), s.gamma0_nc(0)), s.nc_updates},
      {"k_vsc_Ns_m", s.final_nc(1), sc.friction.k_vsc, unid(s.gamma_nc(1), s.gamma0_nc(1)), s.nc_updates},
      {"k_clmb_N", s.final_nc(2), sc.friction.k_clmb, unid(s.gamma_nc(2), s.gamma0_nc(2)), s.nc_updates},
      {"F_d_N", s.final_nc(3), sc.plant.F_d, unid(s.gamma_nc(3), s.gamma0_nc(3)), s.nc_updates},
      {"D_env_Ns_m", s.final_c(0), sc.env.D_env, unid(s.gamma_c(0), s.gamma0_c(0)), s.c_updates},
      {"K_env_N_m", s.final_c(1), sc.env.K_env, unid(s.gamma_c(1), s.gamma0_c(1)), s.c_updates},
      {"env_offset_N", s.final_c(2), offset, unid(s.gamma_c(2), s.gamma0_c(2)), s.c_updates},
  };
}

inline json identify_json(const Scenario& sc, const Summary& s) {
  json a = json::array();
  for (const auto& e : estimate_lines(sc, s)) {
    a.push_back({{"name", e.name}, {"estimate", num(e.estimate)}, {"truth", num(e.truth)},
                 {"rel_error", num(e.rel_error())}, {"updated", e.updates > 0},
                 {"unidentifiable", e.updates > 0 && e.unidentifiable}});
  }
  return {{"estimates", a}, {"diverged", s.diverged}};
}

inline std::string identify_text(const Scenario& sc, const Summary& s) {
  std::string out = fmt::format("{:<14}{:>16}{:>16}{:>14}  status\n", "parameter", "estimate", "truth", "rel error");
  for (const auto& e : estimate_lines(sc, s)) {
    const char* status = e.updates == 0 ? "not updated" : e.unidentifiable ? "UNIDENTIFIABLE" : "ok";
    out += fmt::format("{:<14}{:>16.9g}{:>16.9g}{:>14.3e}  {}\n", e.name, e.estimate, e.truth,
                       e.rel_error(), status);
  }
  return out;
}

}  // namespace rfob::report
