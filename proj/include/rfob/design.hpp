#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfob/cubic.hpp"
#include "rfob/loop_model.hpp"
#include "rfob/observers.hpp"
#include "rfob/polynomial.hpp"

namespace rfob {

struct DesignSpecA {
  double xi = 0.7071;
  double gamma = 1.0;  // fraction of the admissible 2*xi*w_n range actually used
};

struct DesignSpecB {
  double eta = 1.0;  // p / (xi * w_n)
  double xi = 1.0;   // preferred damping; lowered when the bandwidth bound requires it
};

struct DesignSpecC {
  double eta_star = 0.1;  // target eta when xi_plus < 1, must stay below 1
  double eta_free = 1.0;  // target eta when xi_plus >= 1; 1 puts p on w_n
  std::optional<double> xi;
  std::optional<double> k;
};

struct DesignSpecs {
  DesignSpecA damping{};
  DesignSpecB stiffness{};
  DesignSpecC damping_stiffness{};
};

struct Constraint {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

struct DesignResult {
  EnvClass env_class = EnvClass::PureDamping;
  double M_m = 0.0, D_env = 0.0, K_env = 0.0, g_v = 0.0;

  double w_n = 0.0;      // rad/s
  double xi = 0.0;
  double p = 0.0;        // rad/s, zero for the damping case
  double k = 0.0;        // w_n / sqrt(K/M)
  double eta = 0.0;      // p / (xi w_n)
  double psi = 0.0;
  double alpha_g = 0.0;  // rad/s
  double C_f = 0.0;

  double gamma = 0.0;
  double xi_minus = 0.0, xi_plus = 0.0;
  double R = 0.0;
  double xi_star = std::numeric_limits<double>::infinity();

  bool feasible = false;
  bool degenerate = false;
  std::string failure;
  std::vector<Constraint> constraints;
  std::vector<std::string> notes;

  Polynomial target;    // (s + p)(s^2 + 2 xi w_n s + w_n^2), or the quadratic alone
  Polynomial achieved;  // closed-loop denominator with the designed gains
};

/// Target characteristic polynomial for a design.
inline Polynomial target_polynomial(EnvClass cls, double w_n, double xi, double p) {
  const Polynomial quad{1.0, 2.0 * xi * w_n, w_n * w_n};
  if (cls == EnvClass::PureDamping) return quad;
  return Polynomial{1.0, p} * quad;
}

namespace detail {

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("design: ") + what + " must be positive and finite");
  }
}

// Rounding can push alpha_g past g_v/2 when the design sits on the bound.
inline void clamp_to_bound(DesignResult& r) {
  const double cap = 0.5 * r.g_v;
  if (r.alpha_g > cap && r.alpha_g - cap <= 1e-9 * cap) r.alpha_g = cap;
}

inline void finish(DesignResult& r) {
  r.target = target_polynomial(r.env_class, r.w_n, r.xi, r.p);
  EnvImpedance env{r.D_env, r.K_env, 0.0, 0.0};
  if (r.alpha_g > 0.0 && r.C_f > 0.0) {
    r.achieved = closed_loop_char_poly(r.env_class, r.M_m, r.alpha_g, r.C_f, env);
  }
}

inline void add(DesignResult& r, std::string name, double lhs, double rhs, bool pass) {
  r.constraints.push_back({std::move(name), lhs, rhs, pass});
}

inline void fail(DesignResult& r, std::string why) {
  r.feasible = false;
  if (r.failure.empty()) r.failure = std::move(why);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pure damping: s^2 + (alpha_g + D/M) s + C_f alpha_g D = s^2 + 2 xi w_n s + w_n^2.

inline double gamma_lower_bound(double M_m, double D_env, double g_v) {
  return 2.0 * D_env / (M_m * g_v + 2.0 * D_env);
}

inline DesignResult design_damping(double M_m, double D_env, double g_v,
                                   const DesignSpecA& spec = {}) {
  detail::require_positive(M_m, "M_m");
  detail::require_positive(D_env, "D_env");
  detail::require_positive(g_v, "g_v");
  if (!(spec.xi >= 0.707 && spec.xi <= 1.0)) {
    throw std::invalid_argument("design_damping: xi must lie in [0.707, 1]");
  }
  if (!(spec.gamma > 0.0 && spec.gamma <= 1.0)) {
    throw std::invalid_argument("design_damping: gamma must lie in (0, 1]");
  }

  DesignResult r;
  r.env_class = EnvClass::PureDamping;
  r.M_m = M_m;
  r.D_env = D_env;
  r.g_v = g_v;
  r.xi = spec.xi;
  r.gamma = spec.gamma;

  const double d_over_m = D_env / M_m;
  const double gamma_min = gamma_lower_bound(M_m, D_env, g_v);
  r.w_n = spec.gamma / (2.0 * spec.xi) * (0.5 * g_v + d_over_m);
  r.alpha_g = 2.0 * spec.xi * r.w_n - d_over_m;
  detail::clamp_to_bound(r);

  const double two_xi_wn = 2.0 * r.xi * r.w_n;
  detail::add(r, "gamma > 2D/(M g_v + 2D)", spec.gamma, gamma_min, spec.gamma > gamma_min);
  detail::add(r, "D/M < 2 xi w_n", d_over_m, two_xi_wn, d_over_m < two_xi_wn);
  detail::add(r, "2 xi w_n <= g_v/2 + D/M", two_xi_wn, 0.5 * g_v + d_over_m,
              two_xi_wn <= 0.5 * g_v + d_over_m);

  r.feasible = true;
  if (!(spec.gamma > gamma_min) || !(r.alpha_g > 0.0)) {
    r.degenerate = true;
    detail::fail(r, "gamma at or below 2D/(M g_v + 2D): alpha_g = 2 xi w_n - D/M is not positive");
    detail::finish(r);
    return r;
  }
  r.C_f = r.w_n * r.w_n / (r.alpha_g * D_env);
  detail::finish(r);
  return r;
}

// ---------------------------------------------------------------------------
// Pure stiffness: s^3 + alpha_g s^2 + (K/M) s + alpha_g C_f K = (s + p)(s^2 + 2 xi w_n s + w_n^2).

/// Largest xi compatible with the bandwidth bound for a given eta; infinite
/// when every xi is admissible.
inline double stiffness_xi_max(double eta, double R) {
  const double denom = (2.0 + eta) * (2.0 + eta) - 2.0 * R * eta;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(R / denom);
}

/// eta^2 + (4 - 2R) eta + 4 - R/xi^2; the bandwidth bound holds iff this is <= 0.
inline double stiffness_eta_condition(double eta, double xi, double R) {
  return eta * eta + (4.0 - 2.0 * R) * eta + 4.0 - R / (xi * xi);
}

inline DesignResult design_stiffness(double M_m, double K_env, double g_v,
                                     const DesignSpecB& spec = {}) {
  detail::require_positive(M_m, "M_m");
  detail::require_positive(K_env, "K_env");
  detail::require_positive(g_v, "g_v");
  detail::require_positive(spec.xi, "xi");
  if (!(spec.eta >= 0.0) || !std::isfinite(spec.eta)) {
    throw std::invalid_argument("design_stiffness: eta must be non-negative");
  }

  DesignResult r;
  r.env_class = EnvClass::PureStiffness;
  r.M_m = M_m;
  r.K_env = K_env;
  r.g_v = g_v;
  r.R = M_m * g_v * g_v / (4.0 * K_env);
  r.eta = spec.eta;
  r.xi = spec.xi;

  const bool condition_i = M_m * g_v * g_v / K_env >= 16.0;
  if (!condition_i) {
    r.xi_star = 0.5 * std::sqrt(r.R);
    r.notes.push_back("M g_v^2 / K < 16: xi limited to " + std::to_string(r.xi_star) +
                      " (real eta needs xi <= " + std::to_string(1.0 / std::sqrt(4.0 - r.R)) + ")");
  }

  const double xi_max = stiffness_xi_max(r.eta, r.R);
  if (r.xi > xi_max) {
    r.xi = xi_max * (1.0 - 1e-9);
    r.notes.push_back("xi lowered to " + std::to_string(r.xi) + " by the bandwidth bound");
  }

  const double omega = std::sqrt(K_env / M_m);
  r.k = 1.0 / std::sqrt(1.0 + 2.0 * r.eta * r.xi * r.xi);
  r.w_n = r.k * omega;
  r.p = r.eta * r.xi * r.w_n;
  r.alpha_g = 2.0 * r.xi * r.w_n + r.p;
  detail::clamp_to_bound(r);

  const double cond = stiffness_eta_condition(r.eta, r.xi, r.R);
  detail::add(r, "eta^2 + (4-2R) eta + 4 - R/xi^2 <= 0", cond, 0.0, cond <= 0.0);
  detail::add(r, "0 < 2 xi w_n + p", 0.0, r.alpha_g, r.alpha_g > 0.0);
  detail::add(r, "2 xi w_n + p <= g_v/2", r.alpha_g, 0.5 * g_v, r.alpha_g <= 0.5 * g_v);

  r.feasible = true;
  if (r.p < 1e-6 * r.w_n) {
    r.degenerate = true;
    detail::fail(r, "degenerate third pole: eta = 0 puts p at the origin");
  } else if (!(r.alpha_g <= 0.5 * g_v)) {
    detail::fail(r, "bandwidth bound 2 xi w_n + p <= g_v/2 violated");
  }
  if (r.alpha_g > 0.0 && r.p > 0.0) r.C_f = r.w_n * r.w_n * r.p / (r.alpha_g * K_env);
  detail::finish(r);
  return r;
}

// ---------------------------------------------------------------------------
// Damping and stiffness.

struct EtaInterval {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  bool lo_closed = false;
  bool hi_closed = false;
};

struct EtaFeasibility {
  std::vector<EtaInterval> intervals;
  std::vector<double> lambdas;  // real roots in lambda = xi^2 eta*, ascending
};

/// 8 xi^6 eta^3 - (27 psi^2 - 12) xi^4 eta^2 + 6 xi^2 eta + 1; the cubic for k
/// has three real roots iff this is >= 0.
inline double eta_star_condition(double eta, double psi, double xi) {
  const double lam = xi * xi * eta;
  return ((8.0 * lam - (27.0 * psi * psi - 12.0)) * lam + 6.0) * lam + 1.0;
}

inline EtaFeasibility eta_feasibility(double psi, double xi) {
  detail::require_positive(psi, "psi");
  detail::require_positive(xi, "xi");
  EtaFeasibility out;
  const auto sol = solve_cubic(8.0, -(27.0 * psi * psi - 12.0), 6.0, 1.0);
  out.lambdas = real_roots(sol);
  if (psi <= 1.0 || out.lambdas.size() < 3) {
    out.intervals.push_back({0.0, std::numeric_limits<double>::infinity(), false, false});
    return out;
  }
  const double x2 = xi * xi;
  out.intervals.push_back({0.0, out.lambdas[1] / x2, false, true});
  out.intervals.push_back({out.lambdas[2] / x2, std::numeric_limits<double>::infinity(), true, false});
  return out;
}

/// 2 eta xi^2 psi k^3 - (1 + 2 eta xi^2) k^2 + 1 = 0 solved for k; returns
/// the positive real root closest to 1 (the smaller on a tie).
inline std::optional<double> k_near_one(double eta, double xi, double psi) {
  const double c = 2.0 * eta * xi * xi;
  const auto sol = solve_cubic(c * psi, -(1.0 + c), 0.0, 1.0);
  std::optional<double> best;
  for (double k : real_roots(sol)) {
    if (!(k > 0.0)) continue;
    if (!best || std::abs(k - 1.0) < std::abs(*best - 1.0) ||
        (std::abs(k - 1.0) == std::abs(*best - 1.0) && k < *best)) {
      best = k;
    }
  }
  return best;
}

inline bool in_stable_k_region(double k, double psi) {
  return (k < 1.0 && k * psi < 1.0) || (k > 1.0 && k * psi > 1.0);
}

namespace detail {

// Fills w_n, p, eta, alpha_g, C_f and the constraint list for a given (xi, k).
inline void evaluate_c(DesignResult& r, double xi, double k) {
  const double omega = std::sqrt(r.K_env / r.M_m);
  const double d_over_m = r.D_env / r.M_m;
  r.xi = xi;
  r.k = k;
  r.psi = r.D_env / (2.0 * xi * std::sqrt(r.M_m * r.K_env));
  r.w_n = k * omega;
  r.p = omega * (1.0 - k * k) / (2.0 * xi * k * (1.0 - r.psi * k));
  r.eta = r.p / (xi * r.w_n);
  r.alpha_g = 2.0 * xi * r.w_n + r.p - d_over_m;
  clamp_to_bound(r);
  r.C_f = (r.alpha_g > 0.0 && r.p > 0.0) ? r.w_n * r.w_n * r.p / (r.alpha_g * r.K_env) : 0.0;

  r.constraints.clear();
  const double lhs = r.alpha_g + d_over_m;
  add(r, "xi_minus < xi", r.xi_minus, xi, r.xi_minus < xi);
  add(r, "k in stable region (k<1, k<1/psi or k>1, k>1/psi)", k, 1.0 / r.psi,
      in_stable_k_region(k, r.psi));
  add(r, "D/M < (2+eta) xi k sqrt(K/M)", d_over_m, lhs, d_over_m < lhs);
  add(r, "(2+eta) xi k sqrt(K/M) <= g_v/2 + D/M", lhs, 0.5 * r.g_v + d_over_m,
      r.alpha_g <= 0.5 * r.g_v);
}

inline bool c_constraints_hold(const DesignResult& r) {
  return std::all_of(r.constraints.begin(), r.constraints.end(),
                     [](const Constraint& c) { return c.pass; }) &&
         r.alpha_g > 0.0 && r.p > 0.0;
}

// Maximizes min(w_n, p) over k in (0, min(1, 1/psi)) subject to the bandwidth
// bound; p falls and w_n rises with k on that interval.
inline std::optional<double> search_k(DesignResult& r, double xi) {
  const double psi = r.D_env / (2.0 * xi * std::sqrt(r.M_m * r.K_env));
  const double hi = std::min(1.0, 1.0 / psi);
  constexpr int kGrid = 2000;
  std::optional<double> best;
  double best_score = -1.0;
  for (int i = 1; i < kGrid; ++i) {
    const double k = hi * static_cast<double>(i) / kGrid;
    evaluate_c(r, xi, k);
    if (!c_constraints_hold(r)) continue;
    const double score = std::min(r.w_n, r.p);
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  if (!best) return best;
  // Golden-section refinement on the neighbouring grid cells.
  double a = std::max(hi * 1e-6, *best - hi / kGrid), b = std::min(hi * (1 - 1e-12), *best + hi / kGrid);
  auto score = [&](double k) {
    evaluate_c(r, xi, k);
    return c_constraints_hold(r) ? std::min(r.w_n, r.p) : -1.0;
  };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 60; ++it) {
    const double c = b - phi * (b - a), d = a + phi * (b - a);
    if (score(c) >= score(d)) b = d;
    else a = c;
  }
  const double refined = 0.5 * (a + b);
  if (score(refined) >= best_score) best = refined;
  return best;
}

}  // namespace detail

inline DesignResult design_damping_stiffness(double M_m, double D_env, double K_env, double g_v,
                                             const DesignSpecC& spec = {}) {
  detail::require_positive(M_m, "M_m");
  detail::require_positive(D_env, "D_env");
  detail::require_positive(K_env, "K_env");
  detail::require_positive(g_v, "g_v");
  detail::require_positive(spec.eta_star, "eta_star");
  detail::require_positive(spec.eta_free, "eta_free");
  if (spec.xi) detail::require_positive(*spec.xi, "xi");
  if (spec.k) detail::require_positive(*spec.k, "k");

  DesignResult r;
  r.env_class = EnvClass::DampingStiffness;
  r.M_m = M_m;
  r.D_env = D_env;
  r.K_env = K_env;
  r.g_v = g_v;
  const double omega = std::sqrt(K_env / M_m);
  r.xi_minus = (D_env / M_m) / (2.0 * omega);
  r.xi_plus = (0.5 * g_v + D_env / M_m) / (2.0 * omega);

  auto accept = [&](DesignResult& res) {
    res.feasible = detail::c_constraints_hold(res);
    if (res.p < 1e-6 * res.w_n) {
      res.degenerate = true;
      res.feasible = false;
      detail::fail(res, "degenerate third pole: k = 1 gives eta = 0");
    }
    if (!res.feasible && res.failure.empty()) {
      for (const auto& c : res.constraints)
        if (!c.pass) {
          detail::fail(res, "violated: " + c.name);
          break;
        }
      if (res.failure.empty()) detail::fail(res, "alpha_g or p not positive");
    }
    detail::finish(res);
    return res;
  };

  if (spec.k) {
    detail::evaluate_c(r, spec.xi.value_or(r.xi_plus >= 1.0 ? 1.0 : r.xi_plus), *spec.k);
    r.notes.push_back("k fixed by the caller");
    return accept(r);
  }

  if (r.xi_plus >= 1.0) {
    const double xi = spec.xi.value_or(1.0);
    const double psi = D_env / (2.0 * xi * std::sqrt(M_m * K_env));
    if (auto k = k_near_one(spec.eta_free, xi, psi)) {
      detail::evaluate_c(r, xi, *k);
      if (detail::c_constraints_hold(r)) return accept(r);
    }
    r.notes.push_back("cubic root for eta = " + std::to_string(spec.eta_free) +
                      " violates a constraint; k found by search");
    if (auto k = detail::search_k(r, xi)) {
      detail::evaluate_c(r, xi, *k);
      return accept(r);
    }
    detail::evaluate_c(r, xi, std::min(1.0, 1.0 / psi) * 0.5);
    detail::fail(r, "no k in (0, min(1, 1/psi)) satisfies the bandwidth bound");
    return accept(r);
  }

  // xi_plus < 1: fixed eta* below one, xi scanned downward from xi_plus.
  if (!(spec.eta_star < 1.0)) throw std::invalid_argument("design: eta_star must be below 1");
  std::vector<double> candidates;
  if (spec.xi) {
    candidates.push_back(*spec.xi);
  } else {
    constexpr int kSteps = 400;
    for (int i = 0; i < kSteps; ++i) {
      const double t = static_cast<double>(i) / kSteps;
      candidates.push_back(r.xi_plus - t * (r.xi_plus - r.xi_minus));
    }
  }
  std::string last_failure = "no xi candidate";
  for (double xi : candidates) {
    const double psi = D_env / (2.0 * xi * std::sqrt(M_m * K_env));
    if (eta_star_condition(spec.eta_star, psi, xi) < 0.0) {
      last_failure = "eta* outside the admissible set (three-real-root condition fails)";
      continue;
    }
    const auto k = k_near_one(spec.eta_star, xi, psi);
    if (!k) {
      last_failure = "cubic for k has no positive real root";
      continue;
    }
    detail::evaluate_c(r, xi, *k);
    if (detail::c_constraints_hold(r) && r.eta < 1.0) {
      if (!spec.xi && xi != r.xi_plus) r.notes.push_back("xi lowered from xi_plus by the bandwidth bound");
      return accept(r);
    }
    last_failure = "bandwidth bound or stable k region violated";
  }
  if (r.w_n == 0.0) {
    // Nothing evaluable: report the first candidate for the audit.
    r.xi = candidates.front();
    r.psi = D_env / (2.0 * r.xi * std::sqrt(M_m * K_env));
  }
  detail::fail(r, last_failure);
  detail::finish(r);
  return r;
}

/// Design for the class inferred from (D_env, K_env).
inline DesignResult design_for(double M_m, double D_env, double K_env, double g_v,
                               const DesignSpecs& specs = {}) {
  switch (classify_env(D_env, K_env)) {
    case EnvClass::PureDamping: return design_damping(M_m, D_env, g_v, specs.damping);
    case EnvClass::PureStiffness: return design_stiffness(M_m, K_env, g_v, specs.stiffness);
    case EnvClass::DampingStiffness:
      return design_damping_stiffness(M_m, D_env, K_env, g_v, specs.damping_stiffness);
  }
  throw std::logic_error("unreachable");
}

struct BandwidthSplit {
  double g_DOB = 0.0;
  double g_RFOB = 0.0;
  BoundCheck bound;
};

/// Splits the designed product alpha*g into a common DOB/RFOB bandwidth.
inline BandwidthSplit split_alpha_g(const DesignResult& result, double alpha, double g_v) {
  detail::require_positive(alpha, "alpha");
  detail::require_positive(result.alpha_g, "alpha_g");
  const double g = result.alpha_g / alpha;
  // Checked on the product itself so the split cannot add rounding.
  const BoundCheck b = robustness_bound_check(result.alpha_g, 1.0, g_v);
  if (!b.pass) {
    throw std::domain_error("split_alpha_g: alpha*g = " + std::to_string(result.alpha_g) +
                            " exceeds g_v/2 = " + std::to_string(0.5 * g_v));
  }
  return {g, g, b};
}

}  // namespace rfob
