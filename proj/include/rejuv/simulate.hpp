#pragma once

#include <random>
#include <string>
#include <vector>

#include "rejuv/fsm.hpp"
#include "rejuv/pipeline.hpp"
#include "rejuv/quadrotor.hpp"
#include "rejuv/scenario.hpp"

namespace rejuv {

struct TraceRow {
  double t = 0.0;
  Mode mode = Mode::MC;
  Vector x;
  Vector u;       // applied input, absolute coordinates
  bool attack = false;
  double V = 0.0;
  std::string event;
};

struct SimulationTrace {
  std::vector<TraceRow> rows;
  std::vector<ModeEvent> mode_history;
  bool safety_violation = false;
  double max_V = 0.0;
  double max_sc_duration = 0.0;
};

namespace detail {

struct AttackLookup {
  const std::vector<AttackWindow>* windows;
  const AttackWindow* active(double t) const {
    for (const auto& w : *windows)
      if (t >= w.t_start && t < w.t_end) return &w;
    return nullptr;
  }
};

/// Exact zero-order-hold discretization of xdot = A x + B u over one step.
struct ZohModel {
  Matrix Ad, Bd;
  ZohModel(const Matrix& A, const Matrix& B, double dt) {
    const Eigen::Index n = A.rows(), m = B.cols();
    Matrix aug = Matrix::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = A;
    aug.topRightCorner(n, m) = B;
    Matrix E = matrix_exponential(aug, dt);
    Ad = E.topLeftCorner(n, n);
    Bd = E.topRightCorner(n, m);
  }
};

}  // namespace detail

inline Mode mode_of(ControlSource src) {
  switch (src) {
    case ControlSource::Mission: return Mode::MC;
    case ControlSource::Uncertain: return Mode::SR;
    case ControlSource::Safety: return Mode::SC;
  }
  return Mode::MC;
}

inline Vector attack_input_linear(quad::AttackKind kind, const Vector& x,
                                  const Scenario& scenario, const quad::AttackContext& ctx);

/// Fixed-step closed-loop simulation of the full rejuvenation state machine.
/// Each step: mode decision, control-source selection (mission law, attacker
/// through the communication gate, or safety law), mode-appropriate limits,
/// plant integration, logging. Stops at the duration or on a safety
/// violation (V > 1), which is recorded as a failure row.
inline SimulationTrace simulate(const Scenario& scenario, const CertificateReport& cert) {
  if (!cert.feasible) throw ConfigError("simulate: certificate is not feasible");
  const Matrix& P = cert.ellipsoid.P;
  const double dt = scenario.dt;

  RejuvenationConfig cfg;
  cfg.T_sr = scenario.T_sr;
  cfg.t_r = cert.t_r;
  cfg.epsilon = cert.epsilon;
  cfg.mc_limits = cert.mc_limits;
  cfg.sc_limits = scenario.sc_limits;
  cfg.validate(dt);

  const bool is_quad = scenario.kind == PlantKind::quadrotor;
  std::optional<detail::ZohModel> zoh;
  if (!is_quad) zoh.emplace(scenario.plant.A, scenario.plant.B, dt);

  std::mt19937_64 rng(scenario.seed);
  detail::AttackLookup attacks{&scenario.attacks};

  FsmState fsm = FsmState::initial(cfg);
  Vector x = scenario.initial_state;
  Vector x_int = Vector::Zero(3);  // quadrotor position-error integrals
  Vector last_mc_u = scenario.equilibrium_input();
  ControlSource prev_src = ControlSource::Mission;

  SimulationTrace trace;
  const long steps = std::lround(scenario.duration / dt);
  trace.rows.reserve(std::size_t(steps));

  for (long k = 0; k < steps; ++k) {
    const double t = double(k) * dt;
    ControlSource src = fsm_step(fsm, x, P, cfg, dt, t);

    if (src == ControlSource::Uncertain && prev_src == ControlSource::Mission)
      x_int.setZero();  // software refresh wipes the run-time controller state
    prev_src = src;

    const AttackWindow* window = attacks.active(t);
    bool effective = false;
    if (window) {
      if (src == ControlSource::Mission) {
        effective = true;  // communication open during MC
        fsm.attack_latched = true;
      } else if (src == ControlSource::Uncertain) {
        effective = fsm.attack_latched;
      }
    }

    Vector x_aug(x.size() + (is_quad ? 3 : 0));
    x_aug.head(x.size()) = x;
    if (is_quad) x_aug.tail(3) = x_int;

    Vector u;
    std::string event;
    switch (src) {
      case ControlSource::Mission: {
        if (effective) {
          quad::AttackContext ctx;
          ctx.params = &scenario.quad_params;
          ctx.K_mission_aug = &scenario.K_mission;
          ctx.target_offset = window->target_offset;
          ctx.box = &cfg.mc_limits;
          ctx.rng = &rng;
          u = is_quad ? quad::attack_input(window->kind, x_aug, ctx).as_vector()
                      : attack_input_linear(window->kind, x, scenario, ctx);
        } else if (is_quad) {
          u = quad::lqr_integral_control(x_aug, scenario.K_mission, scenario.quad_params)
                  .as_vector();
          x_int += dt * x.head(3);
        } else {
          u = -scenario.K_mission * x;
        }
        u = apply_limits(u, cfg.mc_limits);
        last_mc_u = u;
        break;
      }
      case ControlSource::Uncertain: {
        if (effective) {
          quad::AttackContext ctx;
          ctx.params = &scenario.quad_params;
          ctx.K_mission_aug = &scenario.K_mission;
          ctx.target_offset = window ? window->target_offset : Vector();
          ctx.box = &cfg.mc_limits;
          ctx.rng = &rng;
          const quad::AttackKind kind = window ? window->kind : quad::AttackKind::random_box;
          u = is_quad ? quad::attack_input(kind, x_aug, ctx).as_vector()
                      : attack_input_linear(kind, x, scenario, ctx);
        } else if (scenario.sr_hold == SrHold::zoh) {
          u = last_mc_u;
        } else {
          u = scenario.equilibrium_input();
        }
        u = apply_limits(u, cfg.mc_limits);
        break;
      }
      case ControlSource::Safety: {
        u = -scenario.K_safety * x + scenario.equilibrium_input();
        u = apply_limits(u, cfg.sc_limits);
        break;
      }
    }

    // Integrate the plant.
    if (is_quad) {
      bool gimbal = false;
      quad::WrenchCommand w =
          quad::saturate_through_motors(quad::WrenchCommand::from_vector(u),
                                        scenario.quad_params);
      Vector x_next = quad::rk4_step(x, w, dt, scenario.quad_params, &gimbal);
      if (gimbal) event = "gimbal";
      x = x_next;
    } else {
      x = zoh->Ad * x + zoh->Bd * u;
    }

    const double V = lyapunov_value(P, x);
    trace.max_V = std::max(trace.max_V, V);
    if (fsm.mode == Mode::SC)
      trace.max_sc_duration = std::max(trace.max_sc_duration, fsm.sc_elapsed);

    TraceRow row;
    row.t = t + dt;
    row.mode = mode_of(src);
    row.x = x;
    row.u = u;
    row.attack = effective;
    row.V = V;
    row.event = event;

    if (V > 1.0) {
      row.event = "violation";
      trace.safety_violation = true;
      trace.rows.push_back(std::move(row));
      break;
    }
    trace.rows.push_back(std::move(row));
  }
  trace.mode_history = fsm.mode_history;
  return trace;
}

/// Attacker input for explicit linear plants (deviation coordinates).
inline Vector attack_input_linear(quad::AttackKind kind, const Vector& x,
                                  const Scenario& scenario, const quad::AttackContext& ctx) {
  switch (kind) {
    case quad::AttackKind::turn_off:
      return Vector::Zero(scenario.input_dim());
    case quad::AttackKind::take_over: {
      Vector shifted = x - ctx.target_offset;
      return -scenario.K_mission * shifted;
    }
    case quad::AttackKind::random_box: {
      Vector u(ctx.box->dim());
      std::uniform_int_distribution<int> coin(0, 1);
      for (Eigen::Index i = 0; i < u.size(); ++i)
        u(i) = coin(*ctx.rng) ? ctx.box->upper(i) : ctx.box->lower(i);
      return u;
    }
  }
  throw ConfigError("attack_input_linear: unknown attack kind");
}

struct ValidationReport {
  int runs = 0;
  int violations = 0;
  double max_V = 0.0;
  double max_sc_duration = 0.0;
  long uc_steps = 0;          // steps executed under uncertain/attacked control
  long uc_steps_safe = 0;     // of those, steps with x^T P x <= 1
};

/// Runs `runs` simulations with a random-box attack active through every
/// MC/SR window; deterministic for a given base seed.
inline ValidationReport monte_carlo_validate(const Scenario& scenario,
                                             const CertificateReport& cert, int runs,
                                             std::uint64_t seed) {
  ValidationReport rep;
  rep.runs = runs;
  for (int r = 0; r < runs; ++r) {
    Scenario variant = scenario;
    variant.seed = seed + std::uint64_t(r);
    variant.attacks.clear();
    AttackWindow w;
    w.kind = quad::AttackKind::random_box;
    w.t_start = 0.0;
    w.t_end = scenario.duration + 1.0;
    variant.attacks.push_back(w);

    SimulationTrace trace = simulate(variant, cert);
    if (trace.safety_violation) ++rep.violations;
    rep.max_V = std::max(rep.max_V, trace.max_V);
    rep.max_sc_duration = std::max(rep.max_sc_duration, trace.max_sc_duration);
    for (const auto& row : trace.rows) {
      if (row.mode != Mode::SC) {
        ++rep.uc_steps;
        if (row.V <= 1.0) ++rep.uc_steps_safe;
      }
    }
  }
  return rep;
}

}  // namespace rejuv
