#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "rfob/plant.hpp"

namespace rfob {

struct DobConfig {
  double M_mn = 1.0;    // nominal mass, kg
  double K_Fn = 1.0;    // nominal thrust coefficient, N/A
  double g_DOB = 1.0;   // rad/s
  double g_v = 1000.0;  // velocity-filter cutoff, rad/s

  void validate() const {
    if (!(M_mn > 0.0) || !(K_Fn > 0.0) || !(g_DOB > 0.0) || !(g_v > 0.0)) {
      throw std::invalid_argument("DobConfig: all fields must be positive");
    }
  }
};

struct RfobConfig {
  double M_hat = 1.0;    // identified mass, kg
  double K_F_hat = 1.0;  // identified thrust coefficient, N/A
  double g_RFOB = 1.0;   // rad/s
  FrictionParams friction{};
  double F_d_hat = 0.0;  // N

  void validate() const {
    if (!(M_hat > 0.0) || !(K_F_hat > 0.0) || !(g_RFOB > 0.0)) {
      throw std::invalid_argument("RfobConfig: M_hat, K_F_hat, g_RFOB must be positive");
    }
    friction.validate();
  }
};

/// alpha scales the plant seen through the DOB; beta is the same ratio formed
/// with the RFOB's identified parameters. beta < alpha puts a right-half-plane
/// zero into the force loop.
struct RatioReport {
  double alpha = 1.0;
  double beta = 1.0;
};

inline RatioReport ratios(const PlantParams& pp, const DobConfig& dob, const RfobConfig& rfob) {
  return {(dob.M_mn * pp.K_F) / (pp.M_m * dob.K_Fn),
          (dob.M_mn * rfob.K_F_hat) / (rfob.M_hat * dob.K_Fn)};
}

// ---------------------------------------------------------------------------
// Discrete first-order low-pass g/(s+g), zero-order-hold exact: the pole sits
// at exp(-g*dt) and the DC gain is exactly one.

inline double lowpass_pole(double cutoff, double dt) { return std::exp(-cutoff * dt); }

inline void check_discretization(double cutoff, double dt) {
  if (!(dt > 0.0) || !(cutoff > 0.0)) {
    throw std::invalid_argument("filter: cutoff and dt must be positive");
  }
  if (cutoff * dt >= 1.0) {
    throw std::invalid_argument("filter: cutoff * dt must be below 1");
  }
}

struct VelocityFilterState {
  double output = 0.0;
};

/// Advance the velocity low-pass by one sample.
inline double velocity_filter_step(double raw_xdot, VelocityFilterState& state, double g_v,
                                   double dt) {
  check_discretization(g_v, dt);
  const double a = lowpass_pole(g_v, dt);
  state.output = a * state.output + (1.0 - a) * raw_xdot;
  return state.output;
}

// Observer state for the DOB and RFOB: current estimate plus the velocity
// sample the next update starts from.
struct ObserverState {
  double estimate = 0.0;
  double last_velocity = 0.0;

  static ObserverState at_velocity(double xdot) { return {0.0, xdot}; }
};

namespace detail {

// Velocity-form observer step:
//   est = LPF_g(force + g' * m * xdot) - g' * m * xdot
// with the low-pass state reconstructed from (estimate, last_velocity). The
// feedthrough gain g' = (1 - a)/dt is the discrete counterpart of g; with it the
// realization equals a low-pass of force - m * (backward-difference acceleration),
// so the observer is exact for a plant integrated with semi-implicit Euler.
inline double velocity_form_step(double force_in, double mass, double cutoff, double xdot,
                                 ObserverState& state, double dt) {
  check_discretization(cutoff, dt);
  const double a = lowpass_pole(cutoff, dt);
  const double feed = (1.0 - a) / dt;
  const double lp_prev = state.estimate + feed * mass * state.last_velocity;
  const double lp = a * lp_prev + (1.0 - a) * (force_in + feed * mass * state.last_velocity);
  state.estimate = lp - feed * mass * xdot;
  state.last_velocity = xdot;
  return state.estimate;
}

}  // namespace detail

/// Disturbance observer. `i_m_total` is the current held over the last sample
/// and `xdot_filtered` the velocity measured at its end. Returns F_dis estimate.
/// The compensation current is estimate / K_Fn.
inline double dob_step(double i_m_total, double xdot_filtered, const DobConfig& cfg,
                       ObserverState& state, double dt) {
  return detail::velocity_form_step(cfg.K_Fn * i_m_total, cfg.M_mn, cfg.g_DOB, xdot_filtered,
                                    state, dt);
}

/// Reaction force observer: the DOB input with identified friction, disturbance
/// and parameter variation removed. Friction is evaluated at the velocity the
/// sample interval started from.
inline double rfob_step(double i_m_total, double xdot_filtered, const RfobConfig& cfg,
                        ObserverState& state, double dt) {
  const double known = cfg.K_F_hat * i_m_total -
                       friction_force(state.last_velocity, cfg.friction) - cfg.F_d_hat;
  return detail::velocity_form_step(known, cfg.M_hat, cfg.g_RFOB, xdot_filtered, state, dt);
}

// ---------------------------------------------------------------------------
// Robustness calculus of the DOB loop with a finite velocity-filter cutoff
// g_v = kappa * g_DOB.

struct SecondOrderParams {
  double w_n = 0.0;  // rad/s
  double xi = 0.0;
};

inline SecondOrderParams sensitivity_second_order_params(double alpha, double kappa,
                                                         double g_DOB) {
  if (!(alpha > 0.0) || !(kappa > 0.0) || !(g_DOB > 0.0)) {
    throw std::invalid_argument("sensitivity params: inputs must be positive");
  }
  return {std::sqrt(alpha * kappa) * g_DOB, 0.5 * std::sqrt(kappa / alpha)};
}

struct BoundCheck {
  bool pass = false;
  double margin = 0.0;  // g_v/2 - alpha*g_DOB, rad/s
};

/// alpha * g_DOB <= g_v / 2 keeps the sensitivity damping at or above 0.707.
inline BoundCheck robustness_bound_check(double alpha, double g_DOB, double g_v) {
  if (!(alpha > 0.0) || !(g_DOB > 0.0) || !(g_v > 0.0)) {
    throw std::invalid_argument("robustness bound: inputs must be positive");
  }
  const double margin = 0.5 * g_v - alpha * g_DOB;
  return {margin >= 0.0, margin};
}

struct SensitivityPoint {
  double omega = 0.0;
  std::complex<double> sen;
  std::complex<double> cosen;
};

/// Open DOB loop L(s) = alpha * g_v * g_DOB / (s (s + g_v)) evaluated at s.
inline std::complex<double> dob_loop_gain(std::complex<double> s, double alpha, double kappa,
                                          double g_DOB) {
  const double g_v = kappa * g_DOB;
  return alpha * g_v * g_DOB / (s * (s + g_v));
}

/// Sensitivity 1/(1+L) and co-sensitivity L/(1+L) built from the loop gain.
inline std::vector<SensitivityPoint> sensitivity_response(double alpha, double kappa,
                                                          double g_DOB,
                                                          std::span<const double> omega_grid) {
  if (!(alpha > 0.0) || !(kappa > 0.0) || !(g_DOB > 0.0)) {
    throw std::invalid_argument("sensitivity response: parameters must be positive");
  }
  std::vector<SensitivityPoint> out;
  out.reserve(omega_grid.size());
  for (double w : omega_grid) {
    if (!(w > 0.0)) throw std::invalid_argument("sensitivity response: omega must be positive");
    const auto L = dob_loop_gain({0.0, w}, alpha, kappa, g_DOB);
    out.push_back({w, 1.0 / (1.0 + L), L / (1.0 + L)});
  }
  return out;
}

}  // namespace rfob
