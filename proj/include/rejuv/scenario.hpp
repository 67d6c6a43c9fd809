#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rejuv/ellipsoid.hpp"
#include "rejuv/fsm.hpp"
#include "rejuv/lqr.hpp"
#include "rejuv/plant.hpp"
#include "rejuv/quadrotor.hpp"

namespace rejuv {

using json = nlohmann::json;

enum class PlantKind { quadrotor, linear };
enum class SrHold { zoh, zero };

struct AttackWindow {
  quad::AttackKind kind = quad::AttackKind::turn_off;
  double t_start = 0.0;
  double t_end = 0.0;
  Vector target_offset;  // take_over only
};

struct TuneRequest {
  TuneStrategy strategy = TuneStrategy::shrink_epsilon;
  TuneSchedule schedule;
};

struct Scenario {
  int schema = 1;
  PlantKind kind = PlantKind::quadrotor;
  quad::QuadrotorParams quad_params;
  LinearPlant plant;                  // linearized (or explicit) dynamics
  PolyhedralConstraints constraints;
  Matrix K_safety;                    // m x n
  Matrix K_mission;                   // mission gain; augmented for the quadrotor
  SolverOptions solver;

  double T_sr = 0.1;
  double epsilon = 0.01;
  double grid_step = 0.01;
  double t_max = 10.0;
  ControlPolytope mc_limits;          // absolute input coordinates
  ControlPolytope sc_limits;
  SrHold sr_hold = SrHold::zoh;
  std::uint64_t seed = 0;
  std::optional<TuneRequest> tune;

  std::vector<AttackWindow> attacks;
  double dt = 1e-3;
  double duration = 5.0;
  Vector initial_state;

  Eigen::Index state_dim() const { return plant.state_dim(); }
  Eigen::Index input_dim() const { return plant.input_dim(); }

  /// MC/SR input box in deviation-from-equilibrium coordinates (the frame the
  /// reach analysis works in). For the quadrotor this subtracts hover thrust.
  ControlPolytope mc_limits_deviation() const {
    if (kind == PlantKind::quadrotor) return quad::to_deviation_limits(mc_limits, quad_params);
    return mc_limits;
  }

  Vector equilibrium_input() const {
    Vector u = Vector::Zero(input_dim());
    if (kind == PlantKind::quadrotor) u(0) = quad_params.hover_thrust();
    return u;
  }
};

namespace detail {

inline Matrix parse_matrix(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("scenario: expected a matrix");
  const std::size_t rows = j.size(), cols = j.at(0).size();
  Matrix M(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j.at(r).size() != cols) throw ConfigError("scenario: ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) M(Eigen::Index(r), Eigen::Index(c)) = j.at(r).at(c).get<double>();
  }
  return M;
}

inline Vector parse_vector(const json& j) {
  if (!j.is_array()) throw ConfigError("scenario: expected a vector");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(Eigen::Index(i)) = j.at(i).get<double>();
  return v;
}

inline Matrix diag_from(const json& j) {
  Vector d = parse_vector(j);
  return Matrix(d.asDiagonal());
}

inline ControlPolytope parse_box(const json& j) {
  ControlPolytope box{parse_vector(j.at("lower")), parse_vector(j.at("upper"))};
  box.validate();
  return box;
}

}  // namespace detail

inline Scenario load_scenario(const json& j) {
  Scenario s;
  try {
    s.schema = j.at("schema").get<int>();
    if (s.schema != 1) throw ConfigError("scenario: unsupported schema version");

    const json& plant = j.at("plant");
    const std::string type = plant.at("type").get<std::string>();
    if (type == "quadrotor") {
      s.kind = PlantKind::quadrotor;
      if (plant.contains("params")) {
        const json& p = plant["params"];
        auto& q = s.quad_params;
        q.mass = p.value("mass", q.mass);
        if (p.contains("inertia")) {
          Vector in = detail::parse_vector(p["inertia"]);
          if (in.size() != 3) throw ConfigError("scenario: inertia must have 3 entries");
          q.inertia = in;
        }
        q.arm_length = p.value("arm_length", q.arm_length);
        q.gravity = p.value("gravity", q.gravity);
        q.motor_max_thrust = p.value("motor_max_thrust", q.motor_max_thrust);
        q.motor_max_torque = p.value("motor_max_torque", q.motor_max_torque);
      }
      s.quad_params.validate();
      s.plant = quad::linearize_hover(s.quad_params);
    } else if (type == "linear") {
      s.kind = PlantKind::linear;
      s.plant.A = detail::parse_matrix(plant.at("A"));
      s.plant.B = detail::parse_matrix(plant.at("B"));
      s.plant.x_e = plant.contains("x_e") ? detail::parse_vector(plant["x_e"])
                                          : Vector(Vector::Zero(s.plant.A.rows()));
      s.plant.validate();
    } else {
      throw ConfigError("scenario: plant.type must be 'quadrotor' or 'linear'");
    }

    const json& cons = j.at("constraints");
    if (cons.is_string() || (cons.contains("type") && cons["type"] == "builtin_hover_box")) {
      if (s.kind != PlantKind::quadrotor)
        throw ConfigError("scenario: builtin_hover_box needs the quadrotor plant");
      s.constraints = quad::hover_constraint_box();
    } else {
      s.constraints =
          PolyhedralConstraints::from_rows(detail::parse_matrix(cons.at("a")),
                                           detail::parse_vector(cons.at("b")));
    }

    const json& gains = j.at("gains");
    const json& safety = gains.at("safety");
    if (safety.contains("K")) {
      s.K_safety = detail::parse_matrix(safety["K"]);
    } else {
      s.K_safety = lqr_gain(s.plant.A, s.plant.B, detail::diag_from(safety.at("Q")),
                            detail::diag_from(safety.at("R")));
    }
    const json& mission = gains.at("mission");
    if (mission.contains("K")) {
      s.K_mission = detail::parse_matrix(mission["K"]);
    } else if (s.kind == PlantKind::quadrotor) {
      // Integral action on the three position errors.
      Matrix C = Matrix::Zero(3, quad::kStateDim);
      C.leftCols(3).setIdentity();
      s.K_mission = lqi_gain(s.plant.A, s.plant.B, C, detail::diag_from(mission.at("Q")),
                             detail::diag_from(mission.at("R")));
    } else {
      s.K_mission = lqr_gain(s.plant.A, s.plant.B, detail::diag_from(mission.at("Q")),
                             detail::diag_from(mission.at("R")));
    }

    const json& rj = j.at("rejuvenation");
    s.T_sr = rj.at("T_SR").get<double>();
    s.epsilon = rj.at("epsilon").get<double>();
    s.grid_step = rj.value("grid_step", 0.01);
    s.t_max = rj.value("t_max", 10.0);
    s.seed = rj.value("seed", std::uint64_t{0});
    if (rj.contains("mc_limits") && rj["mc_limits"].is_object()) {
      s.mc_limits = detail::parse_box(rj["mc_limits"]);
    } else if (s.kind == PlantKind::quadrotor) {
      s.mc_limits = quad::mc_wrench_limits(s.quad_params);
    } else {
      throw ConfigError("scenario: mc_limits required for linear plants");
    }
    if (rj.contains("sc_limits") && rj["sc_limits"].is_object()) {
      s.sc_limits = detail::parse_box(rj["sc_limits"]);
    } else if (s.kind == PlantKind::quadrotor) {
      s.sc_limits = quad::sc_wrench_limits(s.quad_params);
    } else {
      s.sc_limits = s.mc_limits;
    }
    const std::string hold = rj.value("sr_hold", std::string("zoh"));
    if (hold == "zoh") s.sr_hold = SrHold::zoh;
    else if (hold == "zero") s.sr_hold = SrHold::zero;
    else throw ConfigError("scenario: sr_hold must be 'zoh' or 'zero'");

    if (rj.contains("tune")) {
      TuneRequest t;
      const std::string strat = rj["tune"].at("strategy").get<std::string>();
      if (strat == "epsilon") t.strategy = TuneStrategy::shrink_epsilon;
      else if (strat == "limits") t.strategy = TuneStrategy::tighten_limits;
      else throw ConfigError("scenario: tune.strategy must be 'epsilon' or 'limits'");
      t.schedule.epsilon_factor = rj["tune"].value("epsilon_factor", 0.5);
      t.schedule.limits_factor = rj["tune"].value("limits_factor", 0.8);
      t.schedule.max_iter = rj["tune"].value("max_iter", 20);
      s.tune = t;
    }

    if (j.contains("solver")) {
      const json& so = j["solver"];
      s.solver.max_iter = so.value("max_iter", s.solver.max_iter);
      s.solver.rel_gap = so.value("rel_gap", s.solver.rel_gap);
      s.solver.barrier_mu = so.value("barrier_mu", s.solver.barrier_mu);
      s.solver.tol_feas = so.value("tol_feas", s.solver.tol_feas);
    }

    for (const json& a : j.value("attacks", json::array())) {
      AttackWindow w;
      const std::string kind = a.at("kind").get<std::string>();
      if (kind == "turn_off") w.kind = quad::AttackKind::turn_off;
      else if (kind == "take_over") w.kind = quad::AttackKind::take_over;
      else if (kind == "random_box") w.kind = quad::AttackKind::random_box;
      else throw ConfigError("scenario: unknown attack kind '" + kind + "'");
      w.t_start = a.at("t_start").get<double>();
      w.t_end = a.at("t_end").get<double>();
      if (a.contains("target_offset")) w.target_offset = detail::parse_vector(a["target_offset"]);
      if (w.kind == quad::AttackKind::take_over && w.target_offset.size() == 0)
        throw ConfigError("scenario: take_over attack needs target_offset");
      s.attacks.push_back(std::move(w));
    }

    const json& sim = j.at("simulation");
    s.dt = sim.at("dt").get<double>();
    s.duration = sim.at("duration").get<double>();
    s.initial_state = sim.contains("initial_state")
                          ? detail::parse_vector(sim["initial_state"])
                          : Vector(Vector::Zero(s.state_dim()));
    if (s.initial_state.size() != s.state_dim())
      throw ConfigError("scenario: initial_state dimension mismatch");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: malformed document: ") + e.what());
  }

  // Cross-checks independent of the certificate (t_r is checked after T_UC is known).
  if (!(s.dt > 0.0)) throw ConfigError("scenario: dt must be positive");
  const double k = std::round(s.T_sr / s.dt);
  if (std::abs(s.T_sr - k * s.dt) > 1e-9)
    throw ConfigError("scenario: dt must divide T_SR");
  if (!s.sc_limits.contains(s.mc_limits))
    throw ConfigError("scenario: MC/SR limits must lie inside SC limits");
  return s;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("scenario: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: JSON parse error: ") + e.what());
  }
  return load_scenario(j);
}

}  // namespace rejuv
