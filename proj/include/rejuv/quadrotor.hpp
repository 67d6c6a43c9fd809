#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "rejuv/linalg.hpp"
#include "rejuv/plant.hpp"

namespace rejuv {
namespace quad {

// State layout (12): position xyz (inertial frame, z up), attitude
// roll/pitch/yaw, velocity xyz, body angular rates. Wrench input (4): total
// thrust F along body z, torques about the three body axes.
constexpr int kStateDim = 12;
constexpr int kWrenchDim = 4;

struct QuadrotorParams {
  double mass = 1.0;                       // kg
  Eigen::Vector3d inertia{0.01, 0.01, 0.02};  // kg m^2, diagonal
  double arm_length = 0.25;                // m
  double gravity = 9.81;                   // m/s^2
  double motor_max_thrust = 4.0;           // N per motor
  double motor_max_torque = 0.05;          // N m per motor
  bool plus_geometry = true;

  double drag_coeff() const { return motor_max_torque / motor_max_thrust; }  // N m per N
  double hover_thrust() const { return mass * gravity; }

  void validate() const {
    if (!(mass > 0.0) || !(arm_length > 0.0) || !(gravity > 0.0) ||
        !(motor_max_thrust > 0.0) || !(motor_max_torque > 0.0) ||
        !(inertia.array() > 0.0).all())
      throw ConfigError("QuadrotorParams: all parameters must be strictly positive");
    if (!plus_geometry)
      throw ConfigError("QuadrotorParams: only the plus geometry is modeled");
  }
};

struct WrenchCommand {
  double F = 0.0;
  Eigen::Vector3d tau = Eigen::Vector3d::Zero();

  Vector as_vector() const {
    Vector u(4);
    u << F, tau(0), tau(1), tau(2);
    return u;
  }
  static WrenchCommand from_vector(const Vector& u) {
    return WrenchCommand{u(0), Eigen::Vector3d(u(1), u(2), u(3))};
  }
};

inline Eigen::Matrix3d rotation_body_to_inertial(double phi, double theta, double psi) {
  const double cf = std::cos(phi), sf = std::sin(phi);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(psi), sp = std::sin(psi);
  Eigen::Matrix3d R;
  R << cp * ct, cp * st * sf - sp * cf, cp * st * cf + sp * sf,
       sp * ct, sp * st * sf + cp * cf, sp * st * cf - cp * sf,
       -st,     ct * sf,               ct * cf;
  return R;
}

/// Newton-Euler rigid-body dynamics. Positive F opposes gravity at hover.
/// Sets *gimbal_flag when pitch approaches +-pi/2 (derivative still returned).
inline Vector dynamics(const Vector& x, const WrenchCommand& w, const QuadrotorParams& params,
                       bool* gimbal_flag = nullptr) {
  params.validate();
  const double phi = x(3), theta = x(4), psi = x(5);
  const Eigen::Vector3d v = x.segment<3>(6);
  const Eigen::Vector3d omega = x.segment<3>(9);

  if (gimbal_flag && std::abs(theta) > M_PI / 2.0 - 1e-3) *gimbal_flag = true;

  Vector dx(kStateDim);
  dx.segment<3>(0) = v;

  // Euler-rate kinematics.
  const double cf = std::cos(phi), sf = std::sin(phi);
  const double ct = std::cos(theta), tt = std::tan(theta);
  Eigen::Matrix3d E;
  E << 1.0, sf * tt, cf * tt,
       0.0, cf,      -sf,
       0.0, sf / ct, cf / ct;
  dx.segment<3>(3) = E * omega;

  Eigen::Matrix3d R = rotation_body_to_inertial(phi, theta, psi);
  dx.segment<3>(6) =
      Eigen::Vector3d(0, 0, -params.gravity) + (w.F / params.mass) * R.col(2);

  const Eigen::Vector3d Iw = params.inertia.asDiagonal() * omega;
  dx.segment<3>(9) = (w.tau - omega.cross(Iw)).array() / params.inertia.array();
  return dx;
}

/// Linearization at hover with the thrust input offset at m g. Input order
/// matches WrenchCommand: (dF, tau_x, tau_y, tau_z).
inline LinearPlant linearize_hover(const QuadrotorParams& params) {
  params.validate();
  Matrix A = Matrix::Zero(kStateDim, kStateDim);
  A.block<3, 3>(0, 6).setIdentity();   // pdot = v
  A.block<3, 3>(3, 9).setIdentity();   // Euler rates = omega at hover
  A(6, 4) = params.gravity;            // vx couples to pitch
  A(7, 3) = -params.gravity;           // vy couples to roll
  Matrix B = Matrix::Zero(kStateDim, kWrenchDim);
  B(8, 0) = 1.0 / params.mass;
  for (int i = 0; i < 3; ++i) B(9 + i, 1 + i) = 1.0 / params.inertia(i);
  return LinearPlant{A, B, Vector::Zero(kStateDim)};
}

struct MixerResult {
  Eigen::Vector4d thrusts;
  bool saturated = false;
};

/// Motor order for the plus geometry: 1 front (+x), 2 right (-y),
/// 3 rear (-x), 4 left (+y); motors 1 and 3 spin opposite to 2 and 4.
///   F      = T1 + T2 + T3 + T4
///   tau_x  = L (T4 - T2)
///   tau_y  = L (T1 - T3)
///   tau_z  = c_d (T1 - T2 + T3 - T4)
inline Eigen::Matrix4d mixer_matrix(const QuadrotorParams& params) {
  const double L = params.arm_length, cd = params.drag_coeff();
  Eigen::Matrix4d M;
  M << 1, 1, 1, 1,
       0, -L, 0, L,
       L, 0, -L, 0,
       cd, -cd, cd, -cd;
  return M;
}

/// Wrench -> per-motor thrusts, clamped to [0, motor_max_thrust].
inline MixerResult mixer(const WrenchCommand& w, const QuadrotorParams& params) {
  MixerResult r;
  r.thrusts = mixer_matrix(params).inverse() * w.as_vector();
  for (int i = 0; i < 4; ++i) {
    double clamped = std::clamp(r.thrusts(i), 0.0, params.motor_max_thrust);
    if (clamped != r.thrusts(i)) r.saturated = true;
    r.thrusts(i) = clamped;
  }
  return r;
}

inline WrenchCommand mixer_inverse(const Eigen::Vector4d& thrusts, const QuadrotorParams& params) {
  return WrenchCommand::from_vector(mixer_matrix(params) * thrusts);
}

/// Realized wrench after motor-level saturation.
inline WrenchCommand saturate_through_motors(const WrenchCommand& w, const QuadrotorParams& params,
                                             bool* saturated = nullptr) {
  MixerResult r = mixer(w, params);
  if (saturated && r.saturated) *saturated = true;
  return mixer_inverse(r.thrusts, params);
}

/// LQR-with-integral mission law: u = -K_aug x_aug plus hover feedforward.
/// x_aug stacks the 12 plant states with 3 position-error integrals.
inline WrenchCommand lqr_integral_control(const Vector& x_aug, const Matrix& K_aug,
                                          const QuadrotorParams& params) {
  if (K_aug.rows() != kWrenchDim || K_aug.cols() != x_aug.size())
    throw ConfigError("lqr_integral_control: gain dimension mismatch");
  Vector u = -K_aug * x_aug;
  u(0) += params.hover_thrust();
  return WrenchCommand::from_vector(u);
}

/// Classical fixed-step RK4 on the nonlinear dynamics.
inline Vector rk4_step(const Vector& x, const WrenchCommand& w, double dt,
                       const QuadrotorParams& params, bool* gimbal_flag = nullptr) {
  if (!(dt > 0.0)) throw DomainError("rk4_step: dt must be positive");
  Vector k1 = dynamics(x, w, params, gimbal_flag);
  Vector k2 = dynamics(x + 0.5 * dt * k1, w, params, gimbal_flag);
  Vector k3 = dynamics(x + 0.5 * dt * k2, w, params, gimbal_flag);
  Vector k4 = dynamics(x + dt * k3, w, params, gimbal_flag);
  Vector next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) throw NonFinite("rk4_step: state became non-finite");
  return next;
}

/// Operating-constraint box for the hover scenario: vertical position +-5 m,
/// horizontal +-2 m, all angles +-pi/4, vertical velocity +-5 m/s, horizontal
/// +-2 m/s, angular rates +-5 rad/s; 24 normalized half-spaces.
inline PolyhedralConstraints hover_constraint_box() {
  Vector bounds(kStateDim);
  bounds << 2.0, 2.0, 5.0,                     // position
            M_PI / 4.0, M_PI / 4.0, M_PI / 4.0,  // angles
            2.0, 2.0, 5.0,                     // velocity
            5.0, 5.0, 5.0;                     // angular rates
  return PolyhedralConstraints::axis_box(bounds);
}

/// Protected MC/SR wrench box in absolute terms: thrust [0, 4 * motor_max],
/// reduced torques roll/pitch +-0.0033 N m and yaw +-0.0005 N m.
inline ControlPolytope mc_wrench_limits(const QuadrotorParams& params,
                                        double roll_pitch_torque = 0.0033,
                                        double yaw_torque = 0.0005) {
  Vector lo(4), hi(4);
  lo << 0.0, -roll_pitch_torque, -roll_pitch_torque, -yaw_torque;
  hi << 4.0 * params.motor_max_thrust, roll_pitch_torque, roll_pitch_torque, yaw_torque;
  return ControlPolytope{lo, hi};
}

/// Full wrench box available to the safety controller: torques +-0.05 N m.
inline ControlPolytope sc_wrench_limits(const QuadrotorParams& params) {
  const double tq = params.motor_max_torque;
  Vector lo(4), hi(4);
  lo << 0.0, -tq, -tq, -tq;
  hi << 4.0 * params.motor_max_thrust, tq, tq, tq;
  return ControlPolytope{lo, hi};
}

/// Absolute wrench box -> deviation-from-hover box (the reach analysis works
/// in deviation coordinates).
inline ControlPolytope to_deviation_limits(const ControlPolytope& absolute,
                                           const QuadrotorParams& params) {
  Vector hover = Vector::Zero(4);
  hover(0) = params.hover_thrust();
  return ControlPolytope{absolute.lower - hover, absolute.upper - hover};
}

enum class AttackKind { turn_off, take_over, random_box };

struct AttackContext {
  const QuadrotorParams* params = nullptr;
  const Matrix* K_mission_aug = nullptr;  // for take_over
  Vector target_offset;                   // equilibrium offset the attacker steers to
  const ControlPolytope* box = nullptr;   // absolute wrench box for random_box
  std::mt19937_64* rng = nullptr;
};

/// Attacker-chosen wrench (absolute). turn_off grounds every propeller;
/// take_over re-targets the mission law at a different equilibrium;
/// random_box picks a uniform random corner of the admissible box each step.
inline WrenchCommand attack_input(AttackKind kind, const Vector& x_aug, const AttackContext& ctx) {
  switch (kind) {
    case AttackKind::turn_off:
      return WrenchCommand{};  // all motors off
    case AttackKind::take_over: {
      if (!ctx.K_mission_aug || !ctx.params)
        throw ConfigError("attack_input: take_over needs the mission gain");
      Vector shifted = x_aug;
      shifted.head(ctx.target_offset.size()) -= ctx.target_offset;
      return lqr_integral_control(shifted, *ctx.K_mission_aug, *ctx.params);
    }
    case AttackKind::random_box: {
      if (!ctx.box || !ctx.rng) throw ConfigError("attack_input: random_box needs box and rng");
      Vector u(ctx.box->dim());
      std::uniform_int_distribution<int> coin(0, 1);
      for (Eigen::Index i = 0; i < u.size(); ++i)
        u(i) = coin(*ctx.rng) ? ctx.box->upper(i) : ctx.box->lower(i);
      return WrenchCommand::from_vector(u);
    }
  }
  throw ConfigError("attack_input: unknown attack kind");
}

}  // namespace quad
}  // namespace rejuv
