#pragma once

#include <cmath>
#include <stdexcept>

namespace rfob {

// Ground-truth single-axis motor: M_m * xddot = K_F * i - F_fric - F_load - F_d.
struct PlantParams {
  double M_m = 1.0;  // kg
  double K_F = 1.0;  // N/A
  double F_d = 0.0;  // constant external disturbance, N

  void validate() const {
    if (!(M_m > 0.0) || !(K_F > 0.0)) {
      throw std::invalid_argument("PlantParams: M_m and K_F must be positive");
    }
  }
};

struct FrictionParams {
  double k_vsc = 0.0;   // Ns/m
  double k_clmb = 0.0;  // N
  double eps = 1e-3;    // smoothing velocity of the Coulomb term, m/s

  void validate() const {
    if (!(k_vsc >= 0.0) || !(k_clmb >= 0.0) || !(eps > 0.0)) {
      throw std::invalid_argument(
          "FrictionParams: k_vsc, k_clmb must be >= 0 and eps > 0");
    }
  }
};

// Lumped spring-damper environment.
struct EnvImpedance {
  double D_env = 0.0;     // Ns/m
  double K_env = 0.0;     // N/m
  double x_env = 0.0;     // m
  double xdot_env = 0.0;  // m/s

  bool empty() const { return D_env == 0.0 && K_env == 0.0; }

  void validate(bool contact_declared = false) const {
    if (!(D_env >= 0.0) || !(K_env >= 0.0)) {
      throw std::invalid_argument("EnvImpedance: D_env and K_env must be >= 0");
    }
    if (contact_declared && empty()) {
      throw std::invalid_argument(
          "EnvImpedance: D_env and K_env are both zero, no contact force exists");
    }
  }
};

// Unilateral: force only while penetrating. Bilateral: the bilinear law
// everywhere, used for comparisons against the linear loop analysis.
enum class ContactModel { Unilateral, Bilateral };

struct PlantState {
  double x_m = 0.0;     // m
  double xdot_m = 0.0;  // m/s

  bool finite() const { return std::isfinite(x_m) && std::isfinite(xdot_m); }
};

// Smooth sign used in place of the discontinuous Coulomb law.
inline double coulomb_shape(double xdot, double eps) { return std::tanh(xdot / eps); }

inline double friction_force(double xdot, const FrictionParams& fp) {
  return fp.k_vsc * xdot + fp.k_clmb * coulomb_shape(xdot, fp.eps);
}

inline double contact_force(const PlantState& state, const EnvImpedance& env,
                            ContactModel model = ContactModel::Unilateral) {
  const double penetration = state.x_m - env.x_env;
  if (model == ContactModel::Unilateral && penetration < 0.0) return 0.0;
  return env.D_env * (state.xdot_m - env.xdot_env) + env.K_env * penetration;
}

inline double plant_accel(double i_m, const PlantState& state, const PlantParams& pp,
                          const FrictionParams& fp, const EnvImpedance& env,
                          ContactModel model = ContactModel::Unilateral) {
  const double thrust = pp.K_F * i_m;
  return (thrust - friction_force(state.xdot_m, fp) - contact_force(state, env, model) -
          pp.F_d) /
         pp.M_m;
}

}  // namespace rfob
