#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "rejuv/ellipsoid.hpp"
#include "rejuv/plant.hpp"

using namespace rejuv;

namespace {

PolyhedralConstraints unit_box(int n) {
  return PolyhedralConstraints::axis_box(Vector::Ones(n));
}

}  // namespace

TEST_CASE("closed_loop_matrix") {
  SECTION("scalar") {
    LinearPlant p{Matrix::Zero(1, 1), Matrix::Ones(1, 1), Vector::Zero(1)};
    auto [A_sc, max_re] = closed_loop_matrix(p, Matrix::Ones(1, 1));
    CHECK(A_sc(0, 0) == -1.0);
    CHECK(max_re == Catch::Approx(-1.0));
  }
  SECTION("double integrator with pd feedback") {
    LinearPlant p{(Matrix(2, 2) << 0, 1, 0, 0).finished(),
                  (Matrix(2, 1) << 0, 1).finished(), Vector::Zero(2)};
    auto [A_sc, max_re] = closed_loop_matrix(p, (Matrix(1, 2) << 1, 2).finished());
    Matrix expected(2, 2);
    expected << 0, 1, -1, -2;
    CHECK((A_sc - expected).cwiseAbs().maxCoeff() == 0.0);
    CHECK(max_re == Catch::Approx(-1.0).margin(1e-9));
  }
  SECTION("unstabilized loop rejected") {
    LinearPlant p{Matrix::Zero(1, 1), Matrix::Ones(1, 1), Vector::Zero(1)};
    CHECK_THROWS_AS(closed_loop_matrix(p, Matrix::Zero(1, 1)), NotHurwitz);
  }
}

TEST_CASE("verify_ellipsoid reports") {
  Matrix A_sc = -Matrix::Identity(2, 2);
  SECTION("identity passes the unit box") {
    auto rep = verify_ellipsoid(Matrix::Identity(2, 2), A_sc, unit_box(2));
    CHECK(rep.all_ok());
    CHECK(rep.lmi_max_eigenvalue == Catch::Approx(-2.0));
    CHECK(rep.max_containment == Catch::Approx(1.0));
  }
  SECTION("oversized ball fails containment") {
    auto rep = verify_ellipsoid(4.0 * Matrix::Identity(2, 2), A_sc, unit_box(2));
    CHECK_FALSE(rep.containment_ok);
    CHECK(rep.max_containment == Catch::Approx(4.0));
  }
  SECTION("unstable loop fails the invariance check") {
    auto rep = verify_ellipsoid(Matrix::Identity(2, 2), Matrix::Identity(2, 2), unit_box(2));
    CHECK_FALSE(rep.lmi_ok);
    CHECK(rep.lmi_max_eigenvalue == Catch::Approx(2.0));
  }
}

TEST_CASE("lyapunov_fallback_ellipsoid") {
  SECTION("identity case") {
    auto e = lyapunov_fallback_ellipsoid(-Matrix::Identity(2, 2), unit_box(2),
                                         2.0 * Matrix::Identity(2, 2));
    CHECK((e.Q - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
  }
  SECTION("scaled scalar constraint") {
    PolyhedralConstraints cons;
    cons.normals.push_back(2.0 * Vector::Ones(1));
    cons.normals.push_back(-2.0 * Vector::Ones(1));
    auto e = lyapunov_fallback_ellipsoid(-Matrix::Identity(1, 1), cons,
                                         2.0 * Matrix::Identity(1, 1));
    CHECK(e.Q(0, 0) == Catch::Approx(0.25));  // interval [-0.5, 0.5]
  }
  SECTION("oscillatory loop satisfies all invariants") {
    Matrix A_sc(2, 2);
    A_sc << 0, 1, -1, -2;
    auto e = lyapunov_fallback_ellipsoid(A_sc, unit_box(2), Matrix::Identity(2, 2));
    auto rep = verify_ellipsoid(e.Q, A_sc, unit_box(2), &e.P);
    CHECK(rep.all_ok());
  }
  SECTION("not hurwitz rejected") {
    CHECK_THROWS_AS(lyapunov_fallback_ellipsoid(Matrix::Zero(1, 1), unit_box(1),
                                                Matrix::Identity(1, 1)),
                    NotHurwitz);
  }
}

TEST_CASE("synthesize_max_ellipsoid simple optima") {
  SECTION("unit box with isotropic decay gives the unit ball") {
    auto e = synthesize_max_ellipsoid(-Matrix::Identity(2, 2), unit_box(2));
    CHECK((e.Q - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 2e-3);
    CHECK(std::abs(e.log_volume) < 2e-3);
  }
  SECTION("1-D maximal interval") {
    auto e = synthesize_max_ellipsoid(-Matrix::Identity(1, 1), unit_box(1));
    CHECK(e.Q(0, 0) == Catch::Approx(1.0).margin(1e-3));
  }
}

TEST_CASE("synthesize_max_ellipsoid matches the 2-D grid oracle") {
  Matrix A_sc(2, 2);
  A_sc << -0.5, 1.0, -1.0, -0.5;
  auto cons = unit_box(2);
  auto e = synthesize_max_ellipsoid(A_sc, cons);
  auto rep = verify_ellipsoid(e.Q, A_sc, cons, &e.P);
  CHECK(rep.all_ok());
  const double oracle_logdet = oracle::max_ellipsoid_logdet_2d(A_sc, cons.normals);
  CHECK(e.log_volume == Catch::Approx(oracle_logdet).margin(1e-2));
}

TEST_CASE("synthesis beats or matches the fallback on every instance") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 2 + trial % 3;
    Matrix A_sc = oracle::random_matrix(n, n, rng) - 2.5 * Matrix::Identity(n, n);
    if (!is_hurwitz(A_sc)) continue;
    auto cons = unit_box(n);
    auto fallback = lyapunov_fallback_ellipsoid(A_sc, cons, Matrix::Identity(n, n));
    auto best = synthesize_max_ellipsoid(A_sc, cons);
    CHECK(best.log_volume >= fallback.log_volume - 1e-6);
    CHECK(verify_ellipsoid(best.Q, A_sc, cons, &best.P).all_ok());
  }
}

TEST_CASE("boundary flow never points outward") {
  std::mt19937_64 rng(17);
  Matrix A_sc(2, 2);
  A_sc << -0.5, 1.0, -1.0, -0.5;
  auto e = synthesize_max_ellipsoid(A_sc, unit_box(2));
  Matrix D = A_sc.transpose() * e.P + e.P * A_sc;
  const double scale = e.Q.cwiseAbs().maxCoeff();
  for (int i = 0; i < 1000; ++i) {
    Vector x = oracle::boundary_point(e.P, 1.0, rng);
    CHECK(x.dot(D * x) <= 1e-8 * scale);
    for (const auto& xi : unit_box(2).normals) CHECK(xi.dot(x) <= 1.0 + 1e-8);
  }
}

TEST_CASE("exact closed-loop trajectories stay inside the invariant set") {
  std::mt19937_64 rng(23);
  Matrix A_sc(2, 2);
  A_sc << -0.5, 1.0, -1.0, -0.5;
  auto e = synthesize_max_ellipsoid(A_sc, unit_box(2));
  const double horizon = 10.0 / 0.5;  // 10 / |dominant real part|
  const double dt = horizon / 200.0;
  Matrix step = matrix_exponential(A_sc, dt);
  for (int i = 0; i < 100; ++i) {
    Vector x = oracle::interior_point(e.P, 1.0, rng);
    double v_prev = x.dot(e.P * x);
    for (int k = 0; k < 200; ++k) {
      x = step * x;
      const double v = x.dot(e.P * x);
      CHECK(v <= v_prev + 1e-7);
      v_prev = v;
    }
  }
}
