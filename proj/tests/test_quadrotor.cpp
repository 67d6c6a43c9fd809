#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "rejuv/lqr.hpp"
#include "rejuv/quadrotor.hpp"

using namespace rejuv;
using namespace rejuv::quad;

namespace {

QuadrotorParams params() { return QuadrotorParams{}; }

Vector hover_state() { return Vector::Zero(kStateDim); }

WrenchCommand hover_wrench(const QuadrotorParams& p) {
  return WrenchCommand{p.hover_thrust(), Eigen::Vector3d::Zero()};
}

/// Central finite differences of the nonlinear dynamics at hover.
void finite_difference_jacobians(const QuadrotorParams& p, Matrix& A, Matrix& B,
                                 double h = 1e-6) {
  A.resize(kStateDim, kStateDim);
  B.resize(kStateDim, kWrenchDim);
  const Vector x0 = hover_state();
  const WrenchCommand w0 = hover_wrench(p);
  for (int j = 0; j < kStateDim; ++j) {
    Vector xp = x0, xm = x0;
    xp(j) += h;
    xm(j) -= h;
    A.col(j) = (dynamics(xp, w0, p) - dynamics(xm, w0, p)) / (2 * h);
  }
  for (int j = 0; j < kWrenchDim; ++j) {
    Vector up = w0.as_vector(), um = w0.as_vector();
    up(j) += h;
    um(j) -= h;
    B.col(j) = (dynamics(x0, WrenchCommand::from_vector(up), p) -
                dynamics(x0, WrenchCommand::from_vector(um), p)) /
               (2 * h);
  }
}

}  // namespace

TEST_CASE("dynamics equilibria") {
  auto p = params();
  SECTION("hover is an exact equilibrium") {
    CHECK(dynamics(hover_state(), hover_wrench(p), p).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("free fall") {
    Vector dx = dynamics(hover_state(), WrenchCommand{}, p);
    CHECK(dx(8) == Catch::Approx(-p.gravity));
    dx(8) = 0.0;
    CHECK(dx.cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("pure yaw torque at rest") {
    WrenchCommand w = hover_wrench(p);
    w.tau = Eigen::Vector3d(0, 0, 0.003);
    Vector dx = dynamics(hover_state(), w, p);
    CHECK(dx(11) == Catch::Approx(0.003 / p.inertia(2)));
    CHECK(dx(9) == 0.0);
    CHECK(dx(10) == 0.0);
  }
  SECTION("gimbal proximity flagged") {
    Vector x = hover_state();
    x(4) = M_PI / 2.0 - 1e-4;
    bool flag = false;
    dynamics(x, hover_wrench(p), p, &flag);
    CHECK(flag);
  }
}

TEST_CASE("hover linearization matches finite differences") {
  auto p = params();
  LinearPlant plant = linearize_hover(p);
  Matrix A_fd, B_fd;
  finite_difference_jacobians(p, A_fd, B_fd);
  for (int i = 0; i < kStateDim; ++i)
    for (int j = 0; j < kStateDim; ++j) {
      const double scale = std::max(std::abs(A_fd(i, j)), 1.0);
      CHECK(std::abs(plant.A(i, j) - A_fd(i, j)) <= 1e-5 * scale);
    }
  for (int i = 0; i < kStateDim; ++i)
    for (int j = 0; j < kWrenchDim; ++j) {
      const double scale = std::max(std::abs(B_fd(i, j)), 1.0);
      CHECK(std::abs(plant.B(i, j) - B_fd(i, j)) <= 1e-5 * scale);
    }
  // Structural spot checks.
  CHECK((plant.A.block<3, 3>(0, 6) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(plant.A(6, 4) == Catch::Approx(p.gravity));
  CHECK(plant.B(8, 0) == Catch::Approx(1.0 / p.mass));
  CHECK(plant.B.col(0).cwiseAbs().sum() == Catch::Approx(1.0 / p.mass));
}

TEST_CASE("mixer") {
  auto p = params();
  SECTION("hover symmetry") {
    auto r = mixer(hover_wrench(p), p);
    CHECK_FALSE(r.saturated);
    for (int i = 0; i < 4; ++i)
      CHECK(r.thrusts(i) == Catch::Approx(p.hover_thrust() / 4.0));
  }
  SECTION("full collective thrust uses every motor at max") {
    WrenchCommand w{4.0 * p.motor_max_thrust, Eigen::Vector3d::Zero()};
    auto r = mixer(w, p);
    for (int i = 0; i < 4; ++i) CHECK(r.thrusts(i) == Catch::Approx(p.motor_max_thrust));
  }
  SECTION("round trip within limits") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> th(-0.02, 0.02);
    for (int trial = 0; trial < 50; ++trial) {
      WrenchCommand w{p.hover_thrust() + th(rng) * 100.0,
                      Eigen::Vector3d(th(rng), th(rng), th(rng))};
      WrenchCommand back = mixer_inverse(mixer(w, p).thrusts, p);
      CHECK((back.as_vector() - w.as_vector()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SECTION("saturation recorded") {
    WrenchCommand w{5.0 * p.motor_max_thrust, Eigen::Vector3d::Zero()};
    CHECK(mixer(w, p).saturated);
  }
}

TEST_CASE("lqr_integral_control") {
  auto p = params();
  SECTION("zero state gives the hover feedforward") {
    Matrix K = Matrix::Random(kWrenchDim, 15);
    WrenchCommand w = lqr_integral_control(Vector::Zero(15), K, p);
    CHECK(w.F == Catch::Approx(p.hover_thrust()));
    CHECK(w.tau.cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("zero gain is pure feedforward") {
    WrenchCommand w = lqr_integral_control(Vector::Ones(15), Matrix::Zero(kWrenchDim, 15), p);
    CHECK(w.F == Catch::Approx(p.hover_thrust()));
  }
  SECTION("synthesized mission gain stabilizes the nonlinear plant") {
    LinearPlant plant = linearize_hover(p);
    Matrix C = Matrix::Zero(3, kStateDim);
    C.leftCols(3).setIdentity();
    Vector qw(15);
    qw << 4, 4, 4, 8, 8, 8, 2, 2, 2, 1, 1, 1, 0.5, 0.5, 0.5;
    Vector rw(4);
    rw << 0.1, 20, 20, 20;
    Matrix K = lqi_gain(plant.A, plant.B, C, Matrix(qw.asDiagonal()), Matrix(rw.asDiagonal()));

    Vector x = Vector::Zero(kStateDim);
    x.head(3).setConstant(0.1);
    Vector x_int = Vector::Zero(3);
    const double dt = 1e-3;
    for (double t = 0.0; t < 10.0; t += dt) {
      Vector aug(15);
      aug << x, x_int;
      WrenchCommand w = lqr_integral_control(aug, K, p);
      x = rk4_step(x, w, dt, p);
      x_int += dt * x.head(3);
    }
    CHECK(x.cwiseAbs().maxCoeff() < 1e-3);
  }
}

TEST_CASE("rk4 integrator") {
  auto p = params();
  SECTION("equilibrium is a fixed point") {
    Vector x = rk4_step(hover_state(), hover_wrench(p), 1e-3, p);
    CHECK(x.cwiseAbs().maxCoeff() < 1e-15);
  }
  SECTION("agrees with the linearized flow near hover") {
    LinearPlant plant = linearize_hover(p);
    Vector x0 = Vector::Zero(kStateDim);
    x0(3) = 0.01;
    x0(7) = 0.01;
    Vector x = x0;
    const double dt = 1e-3;
    for (int k = 0; k < 100; ++k) x = rk4_step(x, hover_wrench(p), dt, p);
    Vector x_lin = matrix_exponential(plant.A, 0.1) * x0;
    CHECK((x - x_lin).cwiseAbs().maxCoeff() < 1e-6);
  }
  SECTION("order-4 step-halving convergence") {
    Vector x0 = Vector::Zero(kStateDim);
    x0(3) = 0.3;
    x0(9) = 1.0;
    WrenchCommand w{0.8 * p.hover_thrust(), Eigen::Vector3d(0.01, -0.005, 0.002)};
    auto integrate = [&](double dt, int steps) {
      Vector x = x0;
      for (int k = 0; k < steps; ++k) x = rk4_step(x, w, dt, p);
      return x;
    };
    Vector ref = integrate(1.0 / 4096.0, 4096);
    double err_h = (integrate(1.0 / 64.0, 64) - ref).norm();
    double err_h2 = (integrate(1.0 / 128.0, 128) - ref).norm();
    const double ratio = err_h / err_h2;
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
  }
  SECTION("free rigid body conserves energy") {
    // No thrust, no gravity: pure rotational dynamics plus ballistic motion.
    auto p0 = p;
    p0.gravity = 1e-12;  // strictly positive per the parameter contract
    Vector x = Vector::Zero(kStateDim);
    x.segment<3>(9) << 2.0, -1.0, 0.5;
    x.segment<3>(6) << 0.3, 0.1, -0.2;
    auto energy = [&](const Vector& s) {
      Eigen::Vector3d omega = s.segment<3>(9);
      Eigen::Vector3d v = s.segment<3>(6);
      return 0.5 * omega.dot(p0.inertia.asDiagonal() * omega) + 0.5 * p0.mass * v.squaredNorm();
    };
    const double e0 = energy(x);
    for (int k = 0; k < 1000; ++k) x = rk4_step(x, WrenchCommand{}, 1e-3, p0);
    CHECK(std::abs(energy(x) - e0) < 1e-6 * e0);
  }
}

TEST_CASE("attack inputs") {
  auto p = params();
  SECTION("turn_off grounds the wrench") {
    AttackContext ctx;
    WrenchCommand w = attack_input(AttackKind::turn_off, Vector::Zero(15), ctx);
    CHECK(w.F == 0.0);
    CHECK(w.tau.cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("take_over steers toward the alternative equilibrium") {
    Matrix K = Matrix::Zero(kWrenchDim, 15);
    K(0, 2) = -1.0;  // climb command proportional to altitude error
    AttackContext ctx;
    ctx.params = &p;
    ctx.K_mission_aug = &K;
    ctx.target_offset = Vector::Zero(15);
    ctx.target_offset(2) = 1.0;  // +1 m vertical
    WrenchCommand w = attack_input(AttackKind::take_over, Vector::Zero(15), ctx);
    CHECK(w.F > p.hover_thrust());  // pushes upward until the SEI cuts it off
  }
  SECTION("random_box is reproducible for a fixed seed") {
    ControlPolytope box{Vector::Zero(4), Vector::Ones(4)};
    auto draw = [&](std::uint64_t seed) {
      std::mt19937_64 rng(seed);
      AttackContext ctx;
      ctx.box = &box;
      ctx.rng = &rng;
      std::vector<double> values;
      for (int i = 0; i < 32; ++i) {
        Vector u = attack_input(AttackKind::random_box, Vector::Zero(15), ctx).as_vector();
        for (Eigen::Index j = 0; j < 4; ++j) values.push_back(u(j));
      }
      return values;
    };
    CHECK(draw(42) == draw(42));
    CHECK(draw(42) != draw(43));
  }
}

TEST_CASE("hover constraint box matches the operating limits") {
  auto cons = hover_constraint_box();
  REQUIRE(cons.normals.size() == 24);
  Vector bounds(kStateDim);
  bounds << 2, 2, 5, M_PI / 4, M_PI / 4, M_PI / 4, 2, 2, 5, 5, 5, 5;
  for (int k = 0; k < kStateDim; ++k) {
    CHECK(cons.normals[std::size_t(2 * k)](k) == Catch::Approx(1.0 / bounds(k)));
    CHECK(cons.normals[std::size_t(2 * k + 1)](k) == Catch::Approx(-1.0 / bounds(k)));
  }
}

TEST_CASE("protected wrench boxes") {
  auto p = params();
  auto mc = mc_wrench_limits(p);
  CHECK(mc.upper(0) == Catch::Approx(16.0));
  CHECK(mc.lower(0) == 0.0);
  CHECK(mc.upper(1) == Catch::Approx(0.0033));
  CHECK(mc.upper(2) == Catch::Approx(0.0033));
  CHECK(mc.upper(3) == Catch::Approx(0.0005));
  auto sc = sc_wrench_limits(p);
  CHECK(sc.upper(1) == Catch::Approx(0.05));
  CHECK(sc.contains(mc));
  auto dev = to_deviation_limits(mc, p);
  CHECK(dev.lower(0) == Catch::Approx(-p.hover_thrust()));
  CHECK(dev.upper(0) == Catch::Approx(16.0 - p.hover_thrust()));
}
