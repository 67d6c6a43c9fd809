#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rejuv/plant.hpp"
#include "rejuv/safety.hpp"

namespace rejuv {

enum class Mode { MC, SR, SC };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::MC: return "MC";
    case Mode::SR: return "SR";
    case Mode::SC: return "SC";
  }
  return "?";
}

/// Who computes the plant input this step.
enum class ControlSource { Mission, Uncertain, Safety };

struct RejuvenationConfig {
  double T_sr = 0.0;     // software refresh duration
  double t_r = 0.0;      // refresh-clock period, T_UC - T_SR
  double epsilon = 0.0;
  ControlPolytope mc_limits;  // protected limits during MC/SR
  ControlPolytope sc_limits;  // full limits for SC

  void validate(double dt) const {
    if (!(t_r > 0.0)) throw ConfigError("RejuvenationConfig: t_r must be positive");
    if (!(T_sr > 0.0)) throw ConfigError("RejuvenationConfig: T_SR must be positive");
    if (!(epsilon > 0.0 && epsilon < 1.0))
      throw ConfigError("RejuvenationConfig: epsilon must be in (0, 1)");
    mc_limits.validate();
    sc_limits.validate();
    if (!sc_limits.contains(mc_limits))
      throw ConfigError("RejuvenationConfig: MC/SR limits must lie inside SC limits");
    if (!(dt > 0.0) || dt > t_r + 1e-12 || dt > T_sr + 1e-12)
      throw ConfigError("RejuvenationConfig: dt must be positive and at most t_r and T_SR");
    // Mode boundaries snap to the step grid.
    auto divides = [dt](double period) {
      const double k = std::round(period / dt);
      return std::abs(period - k * dt) < 1e-9;
    };
    if (!divides(T_sr) || !divides(t_r))
      throw ConfigError("RejuvenationConfig: T_SR and t_r must be integer multiples of dt");
  }
};

struct ModeEvent {
  double t;
  Mode from;
  Mode to;
};

struct FsmState {
  Mode mode = Mode::MC;
  double refresh_clock_remaining = 0.0;
  bool comm_enabled = true;
  bool limits_enabled = true;
  double sr_elapsed = 0.0;
  double sc_elapsed = 0.0;
  bool attack_latched = false;  // attack seen during the preceding MC window
  std::vector<ModeEvent> mode_history;

  static FsmState initial(const RejuvenationConfig& cfg) {
    FsmState s;
    s.mode = Mode::MC;
    s.refresh_clock_remaining = cfg.t_r;
    s.comm_enabled = true;
    s.limits_enabled = true;
    return s;
  }
};

/// Componentwise clamp into the admissible box.
inline Vector apply_limits(const Vector& u, const ControlPolytope& limits) {
  if (u.size() != limits.dim()) throw ConfigError("apply_limits: dimension mismatch");
  return u.cwiseMax(limits.lower).cwiseMin(limits.upper);
}

/// An attack reaches the plant only while communication is open, or during SR
/// when it was latched in the preceding MC window (the corrupted command
/// persists through the refresh).
inline bool gate_communication(const FsmState& fsm, bool attack_active) {
  if (!attack_active) return false;
  if (fsm.comm_enabled) return true;
  return fsm.mode == Mode::SR && fsm.attack_latched;
}

/// One decision step of the rejuvenation mode machine. Transitions are
/// evaluated at the step boundary, then the returned source computes the
/// input applied over [t, t + dt).
///   MC: refresh clock counts down; on timeout enter SR with communication off.
///   SR: after T_SR enter SC with limits off -- unless the state is already in
///       E_eps, in which case SC is skipped and MC resumes directly.
///   SC: exits to MC as soon as x^T P x <= eps.
inline void enter_mc(FsmState& fsm, const RejuvenationConfig& cfg, double now) {
  fsm.mode_history.push_back({now, fsm.mode, Mode::MC});
  fsm.mode = Mode::MC;
  fsm.refresh_clock_remaining = cfg.t_r;
  fsm.comm_enabled = true;
  fsm.limits_enabled = true;
  fsm.attack_latched = false;
  fsm.sr_elapsed = 0.0;
}

inline ControlSource fsm_step(FsmState& fsm, const Vector& x, const Matrix& P,
                              const RejuvenationConfig& cfg, double dt, double now) {
  cfg.validate(dt);
  const double half = 0.5 * dt;

  if (fsm.mode == Mode::SR && fsm.sr_elapsed >= cfg.T_sr - half) {
    // Refresh complete; Alg. entry check: skip SC when already inside E_eps.
    if (in_inner_set(P, x, cfg.epsilon)) {
      enter_mc(fsm, cfg, now);
    } else {
      fsm.mode_history.push_back({now, fsm.mode, Mode::SC});
      fsm.mode = Mode::SC;
      fsm.limits_enabled = false;
      fsm.sc_elapsed = 0.0;
    }
  } else if (fsm.mode == Mode::SC && in_inner_set(P, x, cfg.epsilon)) {
    enter_mc(fsm, cfg, now);
  }

  switch (fsm.mode) {
    case Mode::MC: {
      fsm.refresh_clock_remaining -= dt;
      if (fsm.refresh_clock_remaining < half) {
        // Timeout: this is the last MC step; SR control begins at the next boundary.
        fsm.mode_history.push_back({now + dt, Mode::MC, Mode::SR});
        fsm.mode = Mode::SR;
        fsm.comm_enabled = false;
        fsm.sr_elapsed = 0.0;
      }
      return ControlSource::Mission;
    }
    case Mode::SR:
      fsm.sr_elapsed += dt;
      return ControlSource::Uncertain;
    case Mode::SC:
      fsm.sc_elapsed += dt;
      return ControlSource::Safety;
  }
  return ControlSource::Mission;
}

}  // namespace rejuv
