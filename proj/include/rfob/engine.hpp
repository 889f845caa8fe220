#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfob/design.hpp"
#include "rfob/identify.hpp"
#include "rfob/loop_model.hpp"
#include "rfob/observers.hpp"
#include "rfob/plant.hpp"

namespace rfob {

inline double force_controller(double F_ref, double F_load_hat, double C_f) {
  return C_f * (F_ref - F_load_hat);
}

inline double pd_position_controller(double x_ref, double x_m, double xdot_m, double K_P,
                                     double K_V) {
  return K_P * (x_ref - x_m) - K_V * xdot_m;
}

/// offset (ramped in over ramp_s) + amp sin(2 pi freq t) + amp2 sin(2 pi freq2 t),
/// with t measured from the start of the phase.
struct Reference {
  double offset = 0.0;
  double amp = 0.0;
  double freq_hz = 0.0;
  double amp2 = 0.0;
  double freq2_hz = 0.0;
  double ramp_s = 0.0;

  double at(double t) const {
    const double ramp = ramp_s > 0.0 ? std::min(1.0, t / ramp_s) : 1.0;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return offset * ramp + amp * std::sin(two_pi * freq_hz * t) +
           amp2 * std::sin(two_pi * freq2_hz * t);
  }
};

enum class PhaseKind { Force, Position };

inline const char* to_string(PhaseKind k) { return k == PhaseKind::Force ? "force" : "position"; }

struct Phase {
  PhaseKind kind = PhaseKind::Force;
  double duration = 0.0;  // s
  Reference ref;          // N for force phases, m for position phases
  bool identify = false;  // run the estimator matching the contact mode
};

enum class Adaptation { Off, Online, Offline };

inline const char* to_string(Adaptation a) {
  switch (a) {
    case Adaptation::Off: return "off";
    case Adaptation::Online: return "online";
    case Adaptation::Offline: return "offline";
  }
  return "?";
}

struct IdentifyConfig {
  double mu_nc = 0.999;
  double mu_c = 0.999;
  Vec<4> gamma0_nc = (Vec<4>() << 1e2, 1e3, 1e2, 1e3).finished();
  Vec<3> gamma0_c = (Vec<3>() << 1e3, 1e8, 1e4).finished();
  std::optional<Vec<4>> delta0_nc;  // defaults to the RFOB's current parameters
  Vec<3> delta0_c = Vec<3>::Zero();
  Vec<4> lower_nc = (Vec<4>() << 1e-3, 0.0, 0.0, -1e4).finished();
  Vec<4> upper_nc = (Vec<4>() << 1e3, 1e3, 1e3, 1e4).finished();
  Vec<3> lower_c = (Vec<3>() << 0.0, 0.0, -1e6).finished();
  Vec<3> upper_c = (Vec<3>() << 1e5, 1e8, 1e6).finished();
  double cap_factor = 10.0;
  double g_id = 200.0;  // rad/s, low-pass shared by the non-contact regressor channels
  ContactThresholds thresholds{};
  bool latch = true;    // copy non-contact estimates into the RFOB when an identify phase ends
};

struct Scenario {
  PlantParams plant{};
  FrictionParams friction{};
  EnvImpedance env{};
  ContactModel contact_model = ContactModel::Unilateral;

  DobConfig dob{};
  RfobConfig rfob{};
  bool ideal_velocity = false;  // bypass the velocity filter

  double noise_std = 0.0;  // m/s, additive on measured velocity
  std::uint64_t seed = 1;

  double C_f = 1.0;
  double K_P = 1200.0;
  double K_V = 90.0;

  std::vector<Phase> phases;
  Adaptation adaptation = Adaptation::Off;
  int redesign_every = 100;
  DesignSpecs design{};
  IdentifyConfig identify{};

  double dt = 1e-4;
  PlantState initial{};
  double initial_F_dis_hat = 0.0;
  double x_limit = 10.0;    // m
  double xdot_limit = 100.0;  // m/s

  double duration() const {
    double d = 0.0;
    for (const auto& p : phases) d += p.duration;
    return d;
  }

  void validate() const {
    plant.validate();
    friction.validate();
    env.validate(false);
    dob.validate();
    rfob.validate();
    identify.thresholds.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("scenario: dt must be positive");
    if (!(C_f > 0.0)) throw std::invalid_argument("scenario: C_f must be positive");
    if (redesign_every < 1) throw std::invalid_argument("scenario: redesign_every must be >= 1");
    if (!(noise_std >= 0.0)) throw std::invalid_argument("scenario: noise_std must be >= 0");
    for (const auto& p : phases)
      if (!(p.duration >= 0.0)) throw std::invalid_argument("scenario: phase duration must be >= 0");
    double g_max = std::max({dob.g_DOB, rfob.g_RFOB, identify.g_id});
    if (!ideal_velocity) g_max = std::max(g_max, dob.g_v);
    if (!(g_max * dt < 0.5)) {
      throw std::invalid_argument("scenario: dt * max filter cutoff must be below 0.5");
    }
  }
};

struct Row {
  double t = 0.0;  // s, end of the step
  int phase = 0;
  double ref = 0.0;
  double x = 0.0, xdot = 0.0, xdot_meas = 0.0;
  double F_load = 0.0, F_load_hat = 0.0, F_dis_hat = 0.0;
  double i_m = 0.0, xddot_des = 0.0;
  ContactMode mode = ContactMode::NonContact;
  Vec<4> delta_nc = Vec<4>::Zero();
  Vec<3> delta_c = Vec<3>::Zero();
  Vec<4> gamma_nc = Vec<4>::Zero();  // covariance diagonal
  Vec<3> gamma_c = Vec<3>::Zero();
  double innovation_nc = 0.0, innovation_c = 0.0;
  double g_DOB = 0.0, g_RFOB = 0.0, alpha_g = 0.0, C_f = 0.0;
};

using TimeSeries = std::vector<Row>;

struct AuditEntry {
  double t = 0.0;
  bool applied = false;
  std::string reason;
  double M_hat = 0.0, D_hat = 0.0, K_hat = 0.0;
  double alpha_g = 0.0, C_f = 0.0, g = 0.0;
};

struct PhaseSummary {
  int index = 0;
  PhaseKind kind = PhaseKind::Force;
  double t_start = 0.0, t_end = 0.0;
  double steady_state_error = std::numeric_limits<double>::quiet_NaN();  // |mean(ref - y)| over the last 10%
  double settling_time = std::numeric_limits<double>::quiet_NaN();      // s from phase start, 2% band
  double max_rfob_error = 0.0;   // max |F_load_hat - F_load|, N
  double mean_rfob_error = 0.0;  // mean |F_load_hat - F_load|, N
  double tail_rfob_error = 0.0;  // |mean(F_load_hat - F_load)| over the last 10%, N
  double tail_force_error = 0.0; // |mean(ref - F_load)| over the last 10%, N; force phases only
};

struct Summary {
  std::size_t steps = 0;
  bool diverged = false;
  std::optional<std::size_t> divergence_row;
  std::string divergence_reason;
  std::vector<PhaseSummary> phases;
  double first_contact_time = std::numeric_limits<double>::quiet_NaN();
  double oscillation_metric = 0.0;  // integral of |F_load_hat - F_ref| over force rows after first contact
  Vec<4> final_nc = Vec<4>::Zero();
  Vec<3> final_c = Vec<3>::Zero();
  Vec<4> gamma_nc = Vec<4>::Zero();
  Vec<3> gamma_c = Vec<3>::Zero();
  Vec<4> gamma0_nc = Vec<4>::Zero();
  Vec<3> gamma0_c = Vec<3>::Zero();
  long nc_updates = 0, c_updates = 0;
  std::vector<AuditEntry> audit;
};

struct RunResult {
  TimeSeries rows;
  Summary summary;
};

/// Metrics derived from the recorded rows only.
inline void summarize_rows(const Scenario& sc, const TimeSeries& rows, Summary& s) {
  s.steps = rows.size();
  double t0 = 0.0;
  for (int p = 0; p < static_cast<int>(sc.phases.size()); ++p) {
    PhaseSummary ps;
    ps.index = p;
    ps.kind = sc.phases[static_cast<std::size_t>(p)].kind;
    ps.t_start = t0;
    ps.t_end = t0 + sc.phases[static_cast<std::size_t>(p)].duration;
    t0 = ps.t_end;
    std::vector<const Row*> in;
    for (const auto& r : rows)
      if (r.phase == p) in.push_back(&r);
    if (!in.empty()) {
      auto err = [&](const Row& r) {
        return ps.kind == PhaseKind::Force ? r.ref - r.F_load_hat : r.ref - r.x;
      };
      double sum_abs = 0.0, ref_scale = 0.0;
      for (const Row* r : in) {
        const double e = std::abs(r->F_load_hat - r->F_load);
        ps.max_rfob_error = std::max(ps.max_rfob_error, e);
        sum_abs += e;
        ref_scale = std::max(ref_scale, std::abs(r->ref));
      }
      ps.mean_rfob_error = sum_abs / static_cast<double>(in.size());
      const std::size_t tail = std::max<std::size_t>(1, in.size() / 10);
      double tail_sum = 0.0;
      double tail_rfob = 0.0, tail_force = 0.0;
      for (std::size_t i = in.size() - tail; i < in.size(); ++i) {
        tail_sum += err(*in[i]);
        tail_rfob += in[i]->F_load_hat - in[i]->F_load;
        tail_force += in[i]->ref - in[i]->F_load;
      }
      const double nt = static_cast<double>(tail);
      ps.steady_state_error = std::abs(tail_sum / nt);
      ps.tail_rfob_error = std::abs(tail_rfob / nt);
      ps.tail_force_error = ps.kind == PhaseKind::Force ? std::abs(tail_force / nt) : 0.0;
      const double band = 0.02 * std::max(ref_scale, ps.kind == PhaseKind::Force ? 1e-3 : 1e-6);
      std::optional<std::size_t> last_out;
      for (std::size_t i = 0; i < in.size(); ++i)
        if (std::abs(err(*in[i])) > band) last_out = i;
      if (!last_out) ps.settling_time = in.front()->t - ps.t_start;
      else if (*last_out + 1 < in.size()) ps.settling_time = in[*last_out + 1]->t - ps.t_start;
    }
    s.phases.push_back(ps);
  }

  for (const auto& r : rows) {
    if (r.F_load != 0.0) {
      s.first_contact_time = r.t;
      break;
    }
  }
  s.oscillation_metric = 0.0;
  if (s.diverged) {
    s.oscillation_metric = std::numeric_limits<double>::infinity();
  } else if (!std::isnan(s.first_contact_time)) {
    for (const auto& r : rows) {
      if (r.t < s.first_contact_time) continue;
      if (sc.phases[static_cast<std::size_t>(r.phase)].kind != PhaseKind::Force) continue;
      s.oscillation_metric += std::abs(r.F_load_hat - r.ref) * sc.dt;
    }
  }
  if (!rows.empty()) {
    s.final_nc = rows.back().delta_nc;
    s.final_c = rows.back().delta_c;
    s.gamma_nc = rows.back().gamma_nc;
    s.gamma_c = rows.back().gamma_c;
  }
}

class Simulator {
 public:
  explicit Simulator(Scenario sc) : sc_(std::move(sc)) {
    sc_.validate();
    std::size_t acc = 0;
    double t = 0.0;
    for (const auto& p : sc_.phases) {
      acc += static_cast<std::size_t>(std::llround(p.duration / sc_.dt));
      phase_end_.push_back(acc);
      phase_start_t_.push_back(t);
      t += p.duration;
    }
    total_ = acc;

    plant_ = sc_.initial;
    rfob_ = sc_.rfob;
    g_DOB_ = sc_.dob.g_DOB;
    g_RFOB_ = sc_.rfob.g_RFOB;
    C_f_ = sc_.C_f;
    y_ = plant_.xdot_m;
    vf_.output = plant_.xdot_m;
    dob_state_ = ObserverState::at_velocity(y_);
    dob_state_.estimate = sc_.initial_F_dis_hat;
    rfob_state_ = ObserverState::at_velocity(y_);
    F_dis_hat_ = sc_.initial_F_dis_hat;
    rng_.seed(sc_.seed);

    const auto& id = sc_.identify;
    const Vec<4> d0 = id.delta0_nc.value_or(
        (Vec<4>() << rfob_.M_hat, rfob_.friction.k_vsc, rfob_.friction.k_clmb, rfob_.F_d_hat).finished());
    nc_ = RlmsState<4>::make(d0, id.gamma0_nc, id.mu_nc, id.lower_nc, id.upper_nc, id.cap_factor);
    c_ = RlmsState<3>::make(id.delta0_c, id.gamma0_c, id.mu_c, id.lower_c, id.upper_c, id.cap_factor);
    nc_filter_ = RegressorFilter<4>::with_cutoff(id.g_id, sc_.dt);
    summary_.gamma0_nc = nc_.Gamma0.diagonal();
    summary_.gamma0_c = c_.Gamma0.diagonal();

    if (sc_.adaptation == Adaptation::Offline && total_ > 0) {
      redesign(rfob_.M_hat, sc_.env.D_env, sc_.env.K_env, 0.0);
    }
  }

  std::size_t total_steps() const { return total_; }
  bool halted() const { return halted_; }
  const TimeSeries& rows() const { return rows_; }

  /// Advances one sample. Returns false once the run is complete or halted.
  bool step() {
    if (halted_ || n_ >= total_) return false;
    const double dt = sc_.dt;
    const int ph = phase_index(n_);
    const Phase& phase = sc_.phases[static_cast<std::size_t>(ph)];
    const double t = static_cast<double>(n_) * dt;
    const double ref = phase.ref.at(t - phase_start_t_[static_cast<std::size_t>(ph)]);

    // Controller on the samples available at t.
    const PlantState before = plant_;
    const double y_before = y_;
    const double xddot_des = phase.kind == PhaseKind::Force
                                 ? force_controller(ref, F_load_hat_, C_f_)
                                 : pd_position_controller(ref, before.x_m, y_before, sc_.K_P, sc_.K_V);
    const double F_dis_used = F_dis_hat_;
    const double i_m = (sc_.dob.M_mn / sc_.dob.K_Fn) * xddot_des + F_dis_used / sc_.dob.K_Fn;

    // Plant: semi-implicit Euler.
    const double a = plant_accel(i_m, before, sc_.plant, sc_.friction, sc_.env, sc_.contact_model);
    plant_.xdot_m = before.xdot_m + dt * a;
    plant_.x_m = before.x_m + dt * plant_.xdot_m;

    // Sensor and observers.
    double v_meas = plant_.xdot_m;
    if (sc_.noise_std > 0.0) v_meas += sc_.noise_std * noise_(rng_);
    y_ = sc_.ideal_velocity ? v_meas : velocity_filter_step(v_meas, vf_, sc_.dob.g_v, dt);

    DobConfig dob = sc_.dob;
    dob.g_DOB = g_DOB_;
    F_dis_hat_ = dob_step(i_m, y_, dob, dob_state_, dt);
    RfobConfig rf = rfob_;
    rf.g_RFOB = g_RFOB_;
    F_load_hat_ = rfob_step(i_m, y_, rf, rfob_state_, dt);

    contact_ = detect_contact_step(contact_, F_load_hat_, sc_.identify.thresholds);

    // Regressors run every step so their filter states stay aligned with the data.
    const double thrust_scale = rfob_.K_F_hat / sc_.dob.K_Fn;
    double u_nc = thrust_scale * (sc_.dob.M_mn * xddot_des + F_dis_used);
    if (!sc_.ideal_velocity) {
      const double av = lowpass_pole(sc_.dob.g_v, dt);
      u_nc_h_ = av * u_nc_h_ + (1.0 - av) * u_nc;
      u_nc = u_nc_h_;
    }
    const auto reg_nc = build_regressor_nc(0.0, 0.0, y_before, (y_ - y_before) / dt, 0.0,
                                           rfob_.friction.eps);
    nc_filter_.push(u_nc, reg_nc.rho);
    const double a_rfob = lowpass_pole(g_RFOB_, dt);
    const auto reg_c = build_regressor_c(F_load_hat_, y_before, before.x_m);
    rho_c_ = a_rfob * rho_c_ + (1.0 - a_rfob) * reg_c.rho;

    double innov_nc = 0.0, innov_c = 0.0;
    if (phase.identify) {
      if (contact_.mode == ContactMode::NonContact) {
        innov_nc = rlms_update(nc_, nc_filter_.rho, nc_filter_.u);
        nc_updated_in_phase_ = true;
      } else if (contact_.mode == ContactMode::Contact) {
        innov_c = rlms_update(c_, rho_c_, reg_c.u);
      }
    }

    if (sc_.adaptation == Adaptation::Online && contact_.mode == ContactMode::Contact &&
        (n_ + 1) % static_cast<std::size_t>(sc_.redesign_every) == 0 && c_.updates > 0) {
      redesign(rfob_.M_hat, c_.delta(0), c_.delta(1), t + dt);
    }

    Row row;
    row.t = static_cast<double>(n_ + 1) * dt;
    row.phase = ph;
    row.ref = ref;
    row.x = plant_.x_m;
    row.xdot = plant_.xdot_m;
    row.xdot_meas = y_;
    row.F_load = contact_force(plant_, sc_.env, sc_.contact_model);
    row.F_load_hat = F_load_hat_;
    row.F_dis_hat = F_dis_hat_;
    row.i_m = i_m;
    row.xddot_des = xddot_des;
    row.mode = contact_.mode;
    row.delta_nc = nc_.delta;
    row.delta_c = c_.delta;
    row.gamma_nc = nc_.Gamma.diagonal();
    row.gamma_c = c_.Gamma.diagonal();
    row.innovation_nc = innov_nc;
    row.innovation_c = innov_c;
    row.g_DOB = g_DOB_;
    row.g_RFOB = g_RFOB_;
    row.alpha_g = alpha_hat() * g_DOB_;
    row.C_f = C_f_;
    rows_.push_back(row);

    if (!plant_.finite() || !std::isfinite(F_load_hat_) || std::abs(plant_.x_m) > sc_.x_limit ||
        std::abs(plant_.xdot_m) > sc_.xdot_limit) {
      halted_ = true;
      summary_.diverged = true;
      summary_.divergence_row = rows_.size() - 1;
      summary_.divergence_reason = !plant_.finite() ? "non-finite plant state"
                                   : std::abs(plant_.x_m) > sc_.x_limit ? "position limit exceeded"
                                   : std::abs(plant_.xdot_m) > sc_.xdot_limit ? "velocity limit exceeded"
                                                                            : "non-finite force estimate";
    }

    ++n_;
    if (n_ == phase_end_[static_cast<std::size_t>(ph)]) end_phase(phase);
    return !halted_ && n_ < total_;
  }

  RunResult run() {
    rows_.reserve(total_);
    while (step()) {
    }
    return finish();
  }

  RunResult finish() {
    Summary s = summary_;
    s.nc_updates = nc_.updates;
    s.c_updates = c_.updates;
    s.final_nc = nc_.delta;
    s.final_c = c_.delta;
    s.gamma_nc = nc_.Gamma.diagonal();
    s.gamma_c = c_.Gamma.diagonal();
    summarize_rows(sc_, rows_, s);
    return {rows_, s};
  }

 private:
  int phase_index(std::size_t n) const {
    for (std::size_t p = 0; p < phase_end_.size(); ++p)
      if (n < phase_end_[p]) return static_cast<int>(p);
    return static_cast<int>(phase_end_.size()) - 1;
  }

  // DOB scaling ratio as seen through the RFOB's current parameters.
  double alpha_hat() const {
    return sc_.dob.M_mn * rfob_.K_F_hat / (rfob_.M_hat * sc_.dob.K_Fn);
  }

  void end_phase(const Phase& phase) {
    if (phase.identify && nc_updated_in_phase_ && sc_.identify.latch) {
      rfob_.M_hat = nc_.delta(0);
      rfob_.friction.k_vsc = nc_.delta(1);
      rfob_.friction.k_clmb = nc_.delta(2);
      rfob_.F_d_hat = nc_.delta(3);
    }
    nc_updated_in_phase_ = false;
  }

  void redesign(double M_hat, double D_hat, double K_hat, double t) {
    AuditEntry e;
    e.t = t;
    e.M_hat = M_hat;
    e.D_hat = D_hat;
    e.K_hat = K_hat;
    try {
      const DesignResult d =
          design_for(M_hat, std::max(D_hat, 0.0), std::max(K_hat, 0.0), sc_.dob.g_v, sc_.design);
      e.alpha_g = d.alpha_g;
      e.C_f = d.C_f;
      if (!d.feasible) {
        e.reason = "infeasible: " + d.failure;
      } else {
        const auto split = split_alpha_g(d, alpha_hat(), sc_.dob.g_v);
        e.g = split.g_DOB;
        if (!(split.g_DOB * sc_.dt < 0.5)) {
          e.reason = "bandwidth too high for dt";
        } else {
          g_DOB_ = split.g_DOB;
          g_RFOB_ = split.g_RFOB;
          C_f_ = d.C_f;
          e.applied = true;
          e.reason = "applied";
        }
      }
    } catch (const std::exception& ex) {
      e.reason = std::string("rejected: ") + ex.what();
    }
    summary_.audit.push_back(std::move(e));
  }

  Scenario sc_;
  std::vector<std::size_t> phase_end_;
  std::vector<double> phase_start_t_;
  std::size_t total_ = 0;
  std::size_t n_ = 0;
  bool halted_ = false;

  PlantState plant_{};
  RfobConfig rfob_{};
  double g_DOB_ = 0.0, g_RFOB_ = 0.0, C_f_ = 0.0;
  double y_ = 0.0;
  VelocityFilterState vf_{};
  ObserverState dob_state_{}, rfob_state_{};
  double F_dis_hat_ = 0.0, F_load_hat_ = 0.0;
  ContactState contact_{};

  RlmsState<4> nc_{};
  RlmsState<3> c_{};
  RegressorFilter<4> nc_filter_{};
  double u_nc_h_ = 0.0;
  Vec<3> rho_c_ = Vec<3>::Zero();
  bool nc_updated_in_phase_ = false;

  std::mt19937_64 rng_{};
  std::normal_distribution<double> noise_{0.0, 1.0};

  TimeSeries rows_;
  Summary summary_;
};

inline RunResult run(const Scenario& sc) { return Simulator(sc).run(); }

}  // namespace rfob
