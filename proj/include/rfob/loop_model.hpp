#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfob/cubic.hpp"
#include "rfob/observers.hpp"
#include "rfob/plant.hpp"
#include "rfob/polynomial.hpp"

namespace rfob {

enum class EnvClass { PureDamping, PureStiffness, DampingStiffness };

inline const char* to_string(EnvClass c) {
  switch (c) {
    case EnvClass::PureDamping: return "damping";
    case EnvClass::PureStiffness: return "stiffness";
    case EnvClass::DampingStiffness: return "damping_stiffness";
  }
  return "?";
}

/// Environment class from its coefficients; values at or below `zero_tol`
/// count as absent.
inline EnvClass classify_env(double D_env, double K_env, double zero_tol = 0.0) {
  const bool has_d = D_env > zero_tol, has_k = K_env > zero_tol;
  if (has_d && has_k) return EnvClass::DampingStiffness;
  if (has_d) return EnvClass::PureDamping;
  if (has_k) return EnvClass::PureStiffness;
  throw std::invalid_argument("environment has neither damping nor stiffness");
}

/// phi(s) = (M K_F_hat - M_hat K_F) s^2 + K_F_hat D s + K_F_hat K. The s^2 term
/// is dropped when it cancels to rounding level.
struct PhiPoly {
  Polynomial poly;
};

inline PhiPoly build_phi(const PlantParams& pp, const RfobConfig& rfob, const EnvImpedance& env) {
  const double lead = pp.M_m * rfob.K_F_hat - rfob.M_hat * pp.K_F;
  const double scale = std::max(pp.M_m * rfob.K_F_hat, rfob.M_hat * pp.K_F);
  const double lead_kept = std::abs(lead) <= 1e-12 * scale ? 0.0 : lead;
  return {Polynomial({lead_kept, rfob.K_F_hat * env.D_env, rfob.K_F_hat * env.K_env})};
}

/// Open force loop from reference to RFOB estimate, including the lead-lag
/// compensator (s + g_DOB)/(s + g_RFOB). With equal bandwidths the compensator
/// is cancelled.
inline RationalTf open_loop_general(const PlantParams& pp, const DobConfig& dob,
                                    const RfobConfig& rfob, const EnvImpedance& env,
                                    double C_f) {
  if (env.empty()) throw std::invalid_argument("open loop: environment has no impedance");
  const double alpha = ratios(pp, dob, rfob).alpha;
  const PhiPoly phi = build_phi(pp, rfob, env);
  const double gain = C_f * rfob.g_RFOB * dob.M_mn / dob.K_Fn;
  const Polynomial plant_env{pp.M_m, pp.M_m * alpha * dob.g_DOB + env.D_env, env.K_env};
  const Polynomial integrator{1.0, 0.0};

  const bool equal_bw = std::abs(dob.g_DOB - rfob.g_RFOB) <= 1e-12 * std::max(dob.g_DOB, rfob.g_RFOB);
  if (equal_bw) return {gain * phi.poly, integrator * plant_env};
  return {gain * (Polynomial{1.0, dob.g_DOB} * phi.poly),
          Polynomial{1.0, rfob.g_RFOB} * integrator * plant_env};
}

/// Monic closed-loop denominator of the perfectly identified loop with
/// g_DOB = g_RFOB, for the given environment class.
inline Polynomial closed_loop_char_poly(EnvClass cls, double M_m, double alpha_g, double C_f,
                                       const EnvImpedance& env) {
  const double D = env.D_env, K = env.K_env;
  if (classify_env(D, K) != cls) {
    throw std::invalid_argument(std::string("closed loop: environment does not match class ") +
                                to_string(cls));
  }
  switch (cls) {
    case EnvClass::PureDamping:
      return {1.0, alpha_g + D / M_m, C_f * alpha_g * D};
    case EnvClass::PureStiffness:
      return {1.0, alpha_g, K / M_m, alpha_g * C_f * K};
    case EnvClass::DampingStiffness:
      return {1.0, alpha_g + D / M_m, C_f * alpha_g * D + K / M_m, C_f * alpha_g * K};
  }
  return {};
}

/// Roots of a polynomial of degree 1..3.
inline std::vector<cdouble> poles(const Polynomial& p) {
  const auto& c = p.coeffs();
  switch (p.degree()) {
    case 1: return solve_linear(c[0], c[1]);
    case 2: return solve_quadratic(c[0], c[1], c[2]);
    case 3: {
      const auto sol = solve_cubic(c[0], c[1], c[2], c[3]);
      return {sol.roots.begin(), sol.roots.end()};
    }
    default:
      throw std::invalid_argument("poles: only degrees 1 to 3 are supported, got " +
                                  std::to_string(p.degree()));
  }
}

/// Root-locus asymptote angles in degrees, normalized to (-180, 180].
inline std::vector<double> asymptote_angles(const RationalTf& L) {
  const int r = L.relative_degree();
  if (r < 0) throw std::invalid_argument("asymptote angles: improper transfer function");
  std::vector<double> out;
  for (int k = 0; k < r; ++k) {
    double a = 180.0 * (2 * k + 1) / r;
    if (a > 180.0) a -= 360.0;
    out.push_back(a);
  }
  return out;
}

struct RhpReport {
  bool has_rhp = false;   // a root with strictly positive real part
  bool marginal = false;  // a root on the imaginary axis
  std::vector<cdouble> roots;
};

inline RhpReport rhp_zero_check(const PhiPoly& phi) {
  RhpReport out;
  if (phi.poly.degree() >= 1) out.roots = poles(phi.poly);
  for (const auto& r : out.roots) {
    const double tol = 1e-12 * std::max(1.0, std::abs(r));
    if (r.real() > tol) out.has_rhp = true;
    else if (std::abs(r.real()) <= tol) out.marginal = true;
  }
  return out;
}

/// Routh test: true when every root lies strictly in the left half plane.
inline bool hurwitz_stable(const Polynomial& p) {
  if (p.degree() < 1) return false;
  const Polynomial q = p.leading() < 0.0 ? -1.0 * p : p;
  const int n = q.degree();
  const std::size_t width = static_cast<std::size_t>(n / 2 + 1);
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(n + 1),
                                        std::vector<double>(width + 1, 0.0));
  for (int i = 0; i <= n; ++i) {
    rows[static_cast<std::size_t>(i % 2)][static_cast<std::size_t>(i / 2)] =
        q.coeffs()[static_cast<std::size_t>(i)];
  }
  for (std::size_t r = 2; r < rows.size(); ++r) {
    const auto& up = rows[r - 2];
    const auto& mid = rows[r - 1];
    if (!(mid[0] > 0.0)) return false;
    for (std::size_t j = 0; j < width; ++j) {
      rows[r][j] = (mid[0] * up[j + 1] - up[0] * mid[j + 1]) / mid[0];
    }
  }
  for (const auto& row : rows)
    if (!(row[0] > 0.0)) return false;
  return true;
}

struct LocusPoint {
  double gain = 0.0;
  std::vector<cdouble> poles;
};

/// Closed-loop poles of den + gain * num over a list of gains. `unit_loop` is
/// the open loop evaluated at unit gain.
inline std::vector<LocusPoint> root_locus(const RationalTf& unit_loop,
                                          std::span<const double> gains) {
  std::vector<LocusPoint> out;
  for (double k : gains) out.push_back({k, poles(unit_loop.den + k * unit_loop.num)});
  return out;
}

/// Everything the analyze command reports for one configuration.
struct StabilityReport {
  RatioReport ratios;
  bool beta_below_alpha = false;
  PhiPoly phi;
  RhpReport rhp;
  RationalTf open_loop;
  std::vector<double> asymptotes;
  Polynomial closed_loop;
  std::vector<cdouble> closed_loop_poles;
  bool closed_loop_stable = false;
  BoundCheck dob_bound;
  SecondOrderParams dob_sensitivity;
};

inline StabilityReport analyze_loop(const PlantParams& pp, const DobConfig& dob,
                                    const RfobConfig& rfob, const EnvImpedance& env, double C_f) {
  StabilityReport r;
  r.ratios = ratios(pp, dob, rfob);
  r.beta_below_alpha = r.ratios.beta < r.ratios.alpha;
  r.phi = build_phi(pp, rfob, env);
  r.rhp = rhp_zero_check(r.phi);
  r.open_loop = open_loop_general(pp, dob, rfob, env, C_f);
  r.asymptotes = asymptote_angles(r.open_loop);
  r.closed_loop = (r.open_loop.den + r.open_loop.num).monic();
  r.closed_loop_stable = hurwitz_stable(r.closed_loop);
  if (r.closed_loop.degree() <= 3) r.closed_loop_poles = poles(r.closed_loop);
  r.dob_bound = robustness_bound_check(r.ratios.alpha, dob.g_DOB, dob.g_v);
  r.dob_sensitivity = sensitivity_second_order_params(r.ratios.alpha, dob.g_v / dob.g_DOB, dob.g_DOB);
  return r;
}

}  // namespace rfob
