#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "rfob/observers.hpp"
#include "rfob/plant.hpp"

namespace rfob {

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;
template <int N>
using Mat = Eigen::Matrix<double, N, N>;

/// Recursive least squares with forgetting and box projection.
/// Non-contact: delta = [M_m, k_vsc, k_clmb, F_d]. Contact: delta = [D_env, K_env, offset].
template <int N>
struct RlmsState {
  Vec<N> delta = Vec<N>::Zero();
  Mat<N> Gamma = Mat<N>::Identity();
  Mat<N> Gamma0 = Mat<N>::Identity();
  double mu = 0.999;
  Vec<N> lower = Vec<N>::Constant(-std::numeric_limits<double>::infinity());
  Vec<N> upper = Vec<N>::Constant(std::numeric_limits<double>::infinity());
  // Forgetting is suspended while any diagonal of Gamma exceeds its cap, so an
  // unexcited direction cannot wind up beyond cap_factor * Gamma0.
  Vec<N> gamma_max = Vec<N>::Constant(std::numeric_limits<double>::infinity());
  long updates = 0;
  long resets = 0;

  static RlmsState make(const Vec<N>& delta0, const Vec<N>& gamma0_diag, double mu,
                        const Vec<N>& lower, const Vec<N>& upper, double cap_factor = 10.0) {
    RlmsState s;
    s.Gamma0 = gamma0_diag.asDiagonal();
    s.Gamma = s.Gamma0;
    s.mu = mu;
    s.lower = lower;
    s.upper = upper;
    s.delta = delta0.cwiseMax(lower).cwiseMin(upper);
    s.gamma_max = cap_factor * gamma0_diag;
    s.validate();
    return s;
  }

  void validate() const {
    if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("RLMS: mu must lie in (0, 1]");
    if (!(gamma_max.array() >= Gamma0.diagonal().array()).all()) {
      throw std::invalid_argument("RLMS: covariance cap below the initial covariance");
    }
    if ((lower.array() > upper.array()).any()) {
      throw std::invalid_argument("RLMS: lower bound above upper bound");
    }
    if (!Gamma0.isApprox(Gamma0.transpose()) || Eigen::LLT<Mat<N>>(Gamma0).info() != Eigen::Success) {
      throw std::invalid_argument("RLMS: initial covariance must be symmetric positive definite");
    }
  }

  bool in_box() const {
    return (delta.array() >= lower.array()).all() && (delta.array() <= upper.array()).all();
  }

  /// Components whose variance has not contracted below half its initial value.
  Eigen::Matrix<bool, N, 1> unidentifiable(double ratio = 0.5) const {
    Eigen::Matrix<bool, N, 1> out;
    for (int i = 0; i < N; ++i) out(i) = Gamma(i, i) >= ratio * Gamma0(i, i);
    return out;
  }
};

/// One RLMS step:
///   K = Gamma rho / (mu + rho' Gamma rho), delta += K (u - rho' delta) then clamp,
///   Gamma = (I - K rho') Gamma / mu.
/// Returns the a-priori innovation u - rho' delta.
template <int N>
double rlms_update(RlmsState<N>& s, const Vec<N>& rho, double u) {
  if (!rho.allFinite() || !std::isfinite(u)) {
    throw std::invalid_argument("RLMS: non-finite regressor or measurement");
  }
  const double innovation = u - rho.dot(s.delta);
  const Vec<N> g_rho = s.Gamma * rho;
  const double denom = s.mu + rho.dot(g_rho);
  const Vec<N> gain = g_rho / denom;

  s.delta = (s.delta + gain * innovation).cwiseMax(s.lower).cwiseMin(s.upper);

  Mat<N> next = s.Gamma - gain * g_rho.transpose();
  next = (0.5 * (next + next.transpose())).eval();
  if ((next.diagonal().array() <= s.gamma_max.array()).all()) next /= s.mu;
  if (!next.allFinite() || Eigen::LLT<Mat<N>>(next).info() != Eigen::Success) {
    next = s.Gamma0;
    ++s.resets;
  }
  s.Gamma = next;
  ++s.updates;
  return innovation;
}

// ---------------------------------------------------------------------------
// Regressors.

struct RegressorNc {
  double u = 0.0;  // N
  Vec<4> rho = Vec<4>::Zero();
};

struct RegressorC {
  double u = 0.0;  // N
  Vec<3> rho = Vec<3>::Zero();
};

/// u = thrust_scale (M_mn xddot_des + F_dis_hat), rho = [xddot, xdot, zeta(xdot), 1].
/// thrust_scale = K_F_hat / K_Fn converts the commanded force to the applied one.
inline RegressorNc build_regressor_nc(double xddot_des, double F_dis_hat, double xdot,
                                     double xddot, double M_mn, double friction_eps,
                                     double thrust_scale = 1.0) {
  RegressorNc r;
  r.u = thrust_scale * (M_mn * xddot_des + F_dis_hat);
  r.rho << xddot, xdot, coulomb_shape(xdot, friction_eps), 1.0;
  return r;
}

/// u = F_load_hat, rho = [xdot, x, 1]; the constant column absorbs
/// -(D_env xdot_env + K_env x_env).
inline RegressorC build_regressor_c(double F_load_hat, double xdot, double x) {
  RegressorC r;
  r.u = F_load_hat;
  r.rho << xdot, x, 1.0;
  return r;
}

/// The same first-order low-pass applied to u and every regressor entry, so a
/// relation u = rho' delta with constant delta survives filtering.
template <int N>
struct RegressorFilter {
  double pole = 0.0;  // exp(-cutoff dt); zero passes samples through
  double u = 0.0;
  Vec<N> rho = Vec<N>::Zero();

  static RegressorFilter with_cutoff(double cutoff, double dt) {
    check_discretization(cutoff, dt);
    RegressorFilter f;
    f.pole = lowpass_pole(cutoff, dt);
    return f;
  }

  void push(double u_in, const Vec<N>& rho_in) {
    u = pole * u + (1.0 - pole) * u_in;
    rho = pole * rho + (1.0 - pole) * rho_in;
  }
};

// ---------------------------------------------------------------------------
// Contact detection with hysteresis and dwell.

enum class ContactMode { NonContact, Transition, Contact };

inline const char* to_string(ContactMode m) {
  switch (m) {
    case ContactMode::NonContact: return "noncontact";
    case ContactMode::Transition: return "transition";
    case ContactMode::Contact: return "contact";
  }
  return "?";
}

struct ContactThresholds {
  double on = 1.0;   // N
  double off = 0.5;  // N
  int dwell = 100;   // steps spent in Transition before a mode is confirmed

  void validate() const {
    if (!(on > off) || !(off >= 0.0)) {
      throw std::invalid_argument("contact thresholds: need on > off >= 0");
    }
    if (dwell < 0) throw std::invalid_argument("contact thresholds: dwell must be >= 0");
  }
};

struct ContactState {
  ContactMode mode = ContactMode::NonContact;
  int counter = 0;
  bool releasing = false;  // Transition entered from Contact
};

/// Advances the detector by one force sample.
inline ContactState detect_contact_step(ContactState s, double F_load_hat,
                                        const ContactThresholds& th) {
  const double f = std::abs(F_load_hat);
  switch (s.mode) {
    case ContactMode::NonContact:
      if (f > th.on) s = {ContactMode::Transition, 0, false};
      break;
    case ContactMode::Contact:
      if (f < th.off) s = {ContactMode::Transition, 0, true};
      break;
    case ContactMode::Transition:
      if (!s.releasing && f < th.off) return {ContactMode::NonContact, 0, false};
      if (s.releasing && f > th.on) return {ContactMode::Contact, 0, false};
      break;
  }
  if (s.mode == ContactMode::Transition) {
    if (s.counter >= th.dwell) return {s.releasing ? ContactMode::NonContact : ContactMode::Contact, 0, false};
    ++s.counter;
  }
  return s;
}

/// Runs the detector over a force history from the non-contact state.
inline ContactState detect_contact(std::span<const double> F_load_hat_history,
                                   const ContactThresholds& th) {
  th.validate();
  ContactState s;
  for (double f : F_load_hat_history) s = detect_contact_step(s, f, th);
  return s;
}

}  // namespace rfob
