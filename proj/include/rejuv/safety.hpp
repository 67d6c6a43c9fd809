#pragma once

#include <cmath>

#include "rejuv/linalg.hpp"

namespace rejuv {

/// gamma = lambda_min(W P^{-1}) with W = -(A_SC^T P + P A_SC), computed via
/// the symmetric generalized eigenproblem W v = lambda P v.
inline double decay_rate(const Matrix& A_sc, const Matrix& P) {
  if (!is_positive_definite(P)) throw DomainError("decay_rate: P not SPD");
  Matrix W = -(A_sc.transpose() * P + P * A_sc);
  W = 0.5 * (W + W.transpose());
  const double w_norm = std::max(W.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
  if (sym_min_eigenvalue(W) < -1e-9 * w_norm)
    throw NotCertificate("decay_rate: W has a negative eigenvalue; (A_SC, P) is not a Lyapunov certificate");
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(W, P, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  return es.eigenvalues().minCoeff();
}

/// Worst-case safety-control duration: V decays at rate gamma, so any state
/// with V <= 1 reaches V <= epsilon within -ln(epsilon)/gamma.
inline double safety_time_bound(double gamma, double epsilon) {
  if (!(gamma > 0.0)) throw DomainError("safety_time_bound: gamma must be positive");
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw DomainError("safety_time_bound: epsilon must be in (0, 1]");
  return -std::log(epsilon) / gamma;
}

inline double lyapunov_value(const Matrix& P, const Vector& x) {
  return x.dot(P * x);
}

inline bool in_safe_set(const Matrix& P, const Vector& x) {
  return lyapunov_value(P, x) <= 1.0;
}

inline bool in_inner_set(const Matrix& P, const Vector& x, double epsilon) {
  return lyapunov_value(P, x) <= epsilon;
}

struct SafetyController {
  Matrix K;
  Matrix A_sc;
  Matrix P;
  double gamma = 0.0;
  double epsilon = 0.0;
  double T_sc_bound = 0.0;

  static SafetyController make(const Matrix& K, const Matrix& A_sc, const Matrix& P,
                               double epsilon) {
    SafetyController sc;
    sc.K = K;
    sc.A_sc = A_sc;
    sc.P = P;
    sc.epsilon = epsilon;
    sc.gamma = decay_rate(A_sc, P);
    sc.T_sc_bound = safety_time_bound(sc.gamma, epsilon);
    return sc;
  }
};

}  // namespace rejuv
