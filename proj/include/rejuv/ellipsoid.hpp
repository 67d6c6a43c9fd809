#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rejuv/linalg.hpp"
#include "rejuv/plant.hpp"

namespace rejuv {

/// E_C = {x : x^T P x <= 1} with P = Q^{-1}, invariant for xdot = A_SC x
/// and contained in the polyhedral region.
struct InvariantEllipsoid {
  Matrix Q;
  Matrix P;
  double log_volume = 0.0;  // log det Q
};

struct SolverOptions {
  int max_iter = 500;       // inner iterations per barrier stage
  double rel_gap = 1e-3;    // target gap on log det Q
  double barrier_mu = 10.0; // barrier growth factor
  double tol_feas = 1e-8;
};

struct VerificationReport {
  double lmi_max_eigenvalue = 0.0;   // lambda_max(Q A_SC^T + A_SC Q)
  double max_containment = 0.0;      // max_j xi_j^T Q xi_j
  double min_eigenvalue_Q = 0.0;
  double symmetry_error = 0.0;       // relative, infinity norm
  double inverse_error = 0.0;        // ||P Q - I||_inf
  bool lmi_ok = false;
  bool containment_ok = false;
  bool positive_definite_ok = false;
  bool symmetric_ok = false;
  bool inverse_ok = false;
  bool all_ok() const {
    return lmi_ok && containment_ok && positive_definite_ok && symmetric_ok && inverse_ok;
  }
};

inline VerificationReport verify_ellipsoid(const Matrix& Q, const Matrix& A_sc,
                                           const PolyhedralConstraints& constraints,
                                           const Matrix* P_opt = nullptr) {
  VerificationReport rep;
  const double q_norm = Q.cwiseAbs().rowwise().sum().maxCoeff();
  rep.symmetry_error = (Q - Q.transpose()).cwiseAbs().maxCoeff() / std::max(q_norm, 1e-300);
  rep.symmetric_ok = rep.symmetry_error <= 1e-9;

  rep.lmi_max_eigenvalue = sym_max_eigenvalue(Q * A_sc.transpose() + A_sc * Q);
  rep.lmi_ok = rep.lmi_max_eigenvalue <= 1e-8 * q_norm;

  rep.max_containment = 0.0;
  for (const auto& xi : constraints.normals)
    rep.max_containment = std::max(rep.max_containment, double(xi.transpose() * Q * xi));
  rep.containment_ok = rep.max_containment <= 1.0 + 1e-8;

  rep.min_eigenvalue_Q = sym_min_eigenvalue(Q);
  rep.positive_definite_ok = rep.min_eigenvalue_Q > 0.0;

  Matrix P = P_opt ? *P_opt : Matrix(Q.ldlt().solve(Matrix::Identity(Q.rows(), Q.rows())));
  rep.inverse_error = (P * Q - Matrix::Identity(Q.rows(), Q.rows())).cwiseAbs().maxCoeff();
  rep.inverse_ok = rep.inverse_error <= 1e-7;
  return rep;
}

inline InvariantEllipsoid make_ellipsoid(const Matrix& Q) {
  InvariantEllipsoid e;
  e.Q = 0.5 * (Q + Q.transpose());
  e.P = e.Q.ldlt().solve(Matrix::Identity(Q.rows(), Q.rows()));
  e.P = 0.5 * (e.P + e.P.transpose());
  e.log_volume = std::log(e.Q.determinant());
  return e;
}

/// Baseline invariant ellipsoid from a Lyapunov certificate: P0 solves
/// A_SC^T P0 + P0 A_SC = -W, then Q = c P0^{-1} with the largest c keeping
/// the ellipsoid inside the constraint region.
inline InvariantEllipsoid lyapunov_fallback_ellipsoid(const Matrix& A_sc,
                                                      const PolyhedralConstraints& constraints,
                                                      const Matrix& W) {
  if (!is_hurwitz(A_sc)) throw NotHurwitz("lyapunov_fallback_ellipsoid: A_SC not Hurwitz");
  if (!is_positive_definite(W)) throw DomainError("lyapunov_fallback_ellipsoid: W not SPD");
  constraints.validate();
  Matrix P0 = lyapunov_solve(A_sc, W);
  Matrix P0inv = P0.ldlt().solve(Matrix::Identity(P0.rows(), P0.rows()));
  double max_support = 0.0;
  for (const auto& xi : constraints.normals)
    max_support = std::max(max_support, double(xi.transpose() * P0inv * xi));
  if (max_support <= 0.0)
    throw DegenerateConstraints("lyapunov_fallback_ellipsoid: all support values vanish");
  const double c = 1.0 / max_support;
  return make_ellipsoid(c * P0inv);
}

namespace detail {

struct BarrierState {
  Matrix Q;
  Matrix S;                   // -(A Q + Q A^T), must stay SPD
  std::vector<double> slack;  // 1 - xi^T Q xi, must stay > 0
  double value = 0.0;         // t log det Q + log det S + sum log slack
};

inline bool barrier_eval(const Matrix& Q, const Matrix& A_sc,
                         const PolyhedralConstraints& cons, double t,
                         BarrierState& out) {
  Eigen::LLT<Matrix> lltQ(Q);
  if (lltQ.info() != Eigen::Success) return false;
  Matrix S = -(A_sc * Q + Q * A_sc.transpose());
  S = 0.5 * (S + S.transpose());
  Eigen::LLT<Matrix> lltS(S);
  if (lltS.info() != Eigen::Success) return false;
  double value = 0.0;
  for (Eigen::Index i = 0; i < Q.rows(); ++i) {
    value += 2.0 * t * std::log(lltQ.matrixL()(i, i));
    value += 2.0 * std::log(lltS.matrixL()(i, i));
  }
  std::vector<double> slack;
  slack.reserve(cons.normals.size());
  for (const auto& xi : cons.normals) {
    const double s = 1.0 - xi.transpose() * Q * xi;
    if (s <= 0.0) return false;
    slack.push_back(s);
    value += std::log(s);
  }
  out.Q = Q;
  out.S = std::move(S);
  out.slack = std::move(slack);
  out.value = value;
  return true;
}

inline Matrix barrier_gradient(const BarrierState& st, const Matrix& A_sc,
                               const PolyhedralConstraints& cons, double t) {
  const Eigen::Index n = st.Q.rows();
  Matrix I = Matrix::Identity(n, n);
  Matrix Qinv = st.Q.ldlt().solve(I);
  Matrix Sinv = st.S.ldlt().solve(I);
  Matrix G = t * Qinv - (A_sc.transpose() * Sinv + Sinv * A_sc);
  for (std::size_t j = 0; j < cons.normals.size(); ++j)
    G -= (cons.normals[j] * cons.normals[j].transpose()) / st.slack[j];
  return 0.5 * (G + G.transpose());
}

}  // namespace detail

/// Maximal-volume invariant ellipsoid inside the polyhedral region: maximizes
/// log det Q subject to Q A_SC^T + A_SC Q <= 0, xi_j^T Q xi_j <= 1, Q > 0.
/// Log-barrier ascent with Barzilai-Borwein steps and a backtracking line
/// search; feasibility is maintained through Cholesky checks. Deterministic:
/// initialized from the Lyapunov fallback scaled by 0.5.
inline InvariantEllipsoid synthesize_max_ellipsoid(const Matrix& A_sc,
                                                   const PolyhedralConstraints& constraints,
                                                   const SolverOptions& opts = {}) {
  if (!is_hurwitz(A_sc)) throw NotHurwitz("synthesize_max_ellipsoid: A_SC not Hurwitz");
  if (constraints.normals.empty())
    throw ConfigError("synthesize_max_ellipsoid: empty constraint set");
  constraints.validate();

  const Eigen::Index n = A_sc.rows();
  InvariantEllipsoid start =
      lyapunov_fallback_ellipsoid(A_sc, constraints, Matrix::Identity(n, n));
  Matrix Q = 0.5 * start.Q;

  // Total barrier parameter: LMI block (n) + containment rows + Q > 0 (n).
  const double nu = double(2 * n + constraints.normals.size());
  const double t_final = nu / opts.rel_gap;

  bool ever_feasible = false;
  for (double t = 1.0; ; t *= opts.barrier_mu) {
    detail::BarrierState st;
    if (!detail::barrier_eval(Q, A_sc, constraints, t, st))
      throw SolverFailure("synthesize_max_ellipsoid: lost feasibility at barrier restart");
    ever_feasible = true;

    Matrix G = detail::barrier_gradient(st, A_sc, constraints, t);
    double step = 1.0 / std::max(G.norm(), 1.0);
    Matrix prev_Q, prev_G;

    for (int iter = 0; iter < opts.max_iter; ++iter) {
      const double gnorm = G.norm();
      if (gnorm <= 1e-7 * (1.0 + std::abs(st.value))) break;

      // Barzilai-Borwein step estimate from the previous pair.
      if (iter > 0) {
        Matrix dQ = st.Q - prev_Q;
        Matrix dG = G - prev_G;
        const double num = dQ.cwiseProduct(dQ).sum();
        const double den = std::abs(dQ.cwiseProduct(dG).sum());
        if (den > 1e-300) step = num / den;
      }
      step = std::min(step, 1e6 / gnorm);

      detail::BarrierState trial;
      double s = step;
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        if (detail::barrier_eval(st.Q + s * G, A_sc, constraints, t, trial) &&
            trial.value > st.value + 1e-4 * s * gnorm * gnorm) {
          accepted = true;
          break;
        }
        s *= 0.5;
      }
      if (!accepted) break;

      prev_Q = st.Q;
      prev_G = G;
      st = trial;
      G = detail::barrier_gradient(st, A_sc, constraints, t);
    }
    Q = st.Q;
    if (t >= t_final) break;
  }

  if (!ever_feasible)
    throw SolverFailure("synthesize_max_ellipsoid: no feasible iterate found");
  return make_ellipsoid(Q);
}

}  // namespace rejuv
