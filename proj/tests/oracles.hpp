#pragma once

// Independent reference computations used by the test suites. These stay
// deliberately naive: they must not share code paths with the library.

#include <cmath>
#include <random>

#include "rejuv/linalg.hpp"

namespace oracle {

using rejuv::Matrix;
using rejuv::Vector;

/// Plain Taylor series for e^{M t}, valid for small ||M t||.
inline Matrix expm_taylor(const Matrix& M, double t, int terms = 60) {
  Matrix result = Matrix::Identity(M.rows(), M.cols());
  Matrix term = result;
  for (int k = 1; k <= terms; ++k) {
    term = term * (M * t) / double(k);
    result += term;
  }
  return result;
}

/// Random symmetric matrix with entries in [-scale, scale].
inline Matrix random_symmetric(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) M(i, j) = M(j, i) = dist(rng);
  return M;
}

inline Matrix random_matrix(int n, int m, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix M(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) M(i, j) = dist(rng);
  return M;
}

/// Uniform point on the boundary x^T P x = level.
inline Vector boundary_point(const Matrix& P, double level, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Vector z(P.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = gauss(rng);
  return z * std::sqrt(level / z.dot(P * z));
}

/// Uniform point inside {x : x^T P x <= level}.
inline Vector interior_point(const Matrix& P, double level, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector x = boundary_point(P, level, rng);
  return x * std::pow(unif(rng), 1.0 / double(P.rows()));
}

/// Brute-force search for the maximal-volume invariant ellipsoid in 2-D:
/// Q parameterized by eigenvalues and a rotation, coarse grid then local
/// refinement. Checks the invariance LMI and the containment rows directly.
inline double max_ellipsoid_logdet_2d(const Matrix& A_sc,
                                      const std::vector<Vector>& normals) {
  auto feasible = [&](double a, double b, double theta, Matrix* Q_out) {
    const double c = std::cos(theta), s = std::sin(theta);
    Matrix R(2, 2);
    R << c, -s, s, c;
    Matrix Q = R * Eigen::Vector2d(a, b).asDiagonal() * R.transpose();
    for (const auto& xi : normals)
      if (xi.dot(Q * xi) > 1.0) return false;
    Matrix L = Q * A_sc.transpose() + A_sc * Q;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (L + L.transpose()));
    if (es.eigenvalues().maxCoeff() > 1e-11) return false;
    if (Q_out) *Q_out = Q;
    return true;
  };

  double best = -1e300;
  double best_a = 0, best_b = 0, best_th = 0;
  auto scan = [&](double a_lo, double a_hi, double b_lo, double b_hi, double th_lo,
                  double th_hi, double step_ab, double step_th) {
    for (double a = a_lo; a <= a_hi + 1e-15; a += step_ab)
      for (double b = b_lo; b <= b_hi + 1e-15; b += step_ab)
        for (double th = th_lo; th <= th_hi + 1e-15; th += step_th) {
          if (a <= 0 || b <= 0) continue;
          if (!feasible(a, b, th, nullptr)) continue;
          const double ld = std::log(a) + std::log(b);
          if (ld > best) {
            best = ld;
            best_a = a;
            best_b = b;
            best_th = th;
          }
        }
  };

  scan(0.01, 1.5, 0.01, 1.5, 0.0, M_PI, 1e-2, M_PI / 180.0);
  // Local refinement around the grid optimum.
  for (double step = 5e-3; step > 1e-5; step *= 0.5) {
    const double a0 = best_a, b0 = best_b, t0 = best_th;
    scan(a0 - 2 * step, a0 + 2 * step, b0 - 2 * step, b0 + 2 * step,
         t0 - 2 * step, t0 + 2 * step, step, step);
  }
  return best;
}

}  // namespace oracle
