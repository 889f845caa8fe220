#pragma once

#include <array>
#include <ostream>
#include <string_view>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "rfob/engine.hpp"

namespace rfob {

// Bump when columns are added, removed or reordered.
inline constexpr int kCsvSchemaVersion = 1;

// `ref` is in N during force phases and in m during position phases.
inline constexpr std::array<std::string_view, 32> kCsvColumns{
    "t_s",           "phase",          "ref",             "x_m_m",
    "xdot_m_m_s",    "xdot_meas_m_s",  "F_load_N",        "F_hat_load_N",
    "F_hat_dis_N",   "i_m_A",          "xddot_des_m_s2",  "mode",
    "M_hat_kg",      "k_vsc_hat_Ns_m", "k_clmb_hat_N",    "F_d_hat_N",
    "D_env_hat_Ns_m", "K_env_hat_N_m", "env_offset_hat_N", "gamma_nc_M",
    "gamma_nc_vsc",  "gamma_nc_clmb",  "gamma_nc_Fd",     "gamma_c_D",
    "gamma_c_K",     "gamma_c_offset", "innovation_nc_N", "innovation_c_N",
    "g_DOB_rad_s",   "g_RFOB_rad_s",   "alpha_g_rad_s",   "C_f",
};

inline void write_csv_header(std::ostream& os) {
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    if (i) os << ',';
    os << kCsvColumns[i];
  }
  os << '\n';
}

inline void write_csv_row(std::ostream& os, const Row& r) {
  auto num = [](double v) { return fmt::format("{:.12g}", v); };
  fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{}", num(r.t), r.phase, num(r.ref), num(r.x),
             num(r.xdot), num(r.xdot_meas), num(r.F_load), num(r.F_load_hat), num(r.F_dis_hat),
             num(r.i_m), num(r.xddot_des), to_string(r.mode));
  for (int i = 0; i < 4; ++i) os << ',' << num(r.delta_nc(i));
  for (int i = 0; i < 3; ++i) os << ',' << num(r.delta_c(i));
  for (int i = 0; i < 4; ++i) os << ',' << num(r.gamma_nc(i));
  for (int i = 0; i < 3; ++i) os << ',' << num(r.gamma_c(i));
  fmt::print(os, ",{},{},{},{},{},{}\n", num(r.innovation_nc), num(r.innovation_c), num(r.g_DOB),
             num(r.g_RFOB), num(r.alpha_g), num(r.C_f));
}

inline void write_csv(std::ostream& os, const TimeSeries& rows) {
  write_csv_header(os);
  for (const auto& r : rows) write_csv_row(os, r);
}

inline constexpr std::array<std::string_view, 19> kIdentifyCsvColumns{
    "t_s",           "mode",           "M_hat_kg",         "k_vsc_hat_Ns_m", "k_clmb_hat_N",
    "F_d_hat_N",     "D_env_hat_Ns_m", "K_env_hat_N_m",    "env_offset_hat_N", "gamma_nc_M",
    "gamma_nc_vsc",  "gamma_nc_clmb",  "gamma_nc_Fd",      "gamma_c_D",      "gamma_c_K",
    "gamma_c_offset", "innovation_nc_N", "innovation_c_N", "F_hat_load_N",
};

// Estimator trace: the identification columns of the full schema.
inline void write_identify_csv(std::ostream& os, const TimeSeries& rows) {
  for (std::size_t i = 0; i < kIdentifyCsvColumns.size(); ++i) {
    if (i) os << ',';
    os << kIdentifyCsvColumns[i];
  }
  os << '\n';
  auto num = [](double v) { return fmt::format("{:.12g}", v); };
  for (const auto& r : rows) {
    os << num(r.t) << ',' << to_string(r.mode);
    for (int i = 0; i < 4; ++i) os << ',' << num(r.delta_nc(i));
    for (int i = 0; i < 3; ++i) os << ',' << num(r.delta_c(i));
    for (int i = 0; i < 4; ++i) os << ',' << num(r.gamma_nc(i));
    for (int i = 0; i < 3; ++i) os << ',' << num(r.gamma_c(i));
    os << ',' << num(r.innovation_nc) << ',' << num(r.innovation_c) << ',' << num(r.F_load_hat) << '\n';
  }
}

}  // namespace rfob
