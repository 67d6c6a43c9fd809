#pragma once

#include <complex>

#include "rejuv/linalg.hpp"

namespace rejuv {

/// Stabilizing solution of A^T X + X A - X B R^{-1} B^T X + Qw = 0 via the
/// stable invariant subspace of the Hamiltonian, refined by a few
/// Newton-Kleinman sweeps (each sweep is one Lyapunov solve).
inline Matrix care_solve(const Matrix& A, const Matrix& B, const Matrix& Qw, const Matrix& R) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || Qw.rows() != n || Qw.cols() != n ||
      R.rows() != B.cols() || R.cols() != B.cols())
    throw DomainError("care_solve: dimension mismatch");

  Matrix Rinv = R.ldlt().solve(Matrix::Identity(R.rows(), R.rows()));
  Matrix G = B * Rinv * B.transpose();

  Matrix H(2 * n, 2 * n);
  H << A, -G, -Qw, -A.transpose();

  Eigen::EigenSolver<Matrix> es(H);
  if (es.info() != Eigen::Success) throw SolverFailure("care_solve: Hamiltonian eigensolve failed");

  Eigen::MatrixXcd basis(2 * n, n);
  Eigen::Index found = 0;
  for (Eigen::Index i = 0; i < 2 * n && found < n; ++i) {
    if (es.eigenvalues()(i).real() < 0.0) basis.col(found++) = es.eigenvectors().col(i);
  }
  if (found != n) throw SolverFailure("care_solve: stable subspace has wrong dimension");

  Eigen::MatrixXcd X1 = basis.topRows(n);
  Eigen::MatrixXcd X2 = basis.bottomRows(n);
  Matrix X = (X2 * X1.inverse()).real();
  X = 0.5 * (X + X.transpose());

  // Newton-Kleinman polish: K = R^{-1} B^T X, then solve the closed-loop
  // Lyapunov equation for the next iterate.
  for (int sweep = 0; sweep < 5; ++sweep) {
    Matrix K = Rinv * B.transpose() * X;
    Matrix Acl = A - B * K;
    if (!is_hurwitz(Acl, 0.0)) break;
    Matrix X_next = lyapunov_solve(Acl, Qw + K.transpose() * R * K);
    const double delta = (X_next - X).cwiseAbs().maxCoeff();
    X = X_next;
    if (delta < 1e-12 * std::max(1.0, X.cwiseAbs().maxCoeff())) break;
  }

  Matrix residual = A.transpose() * X + X * A - X * G * X + Qw;
  if (residual.cwiseAbs().maxCoeff() > 1e-6 * std::max(1.0, X.cwiseAbs().maxCoeff()))
    throw SolverFailure("care_solve: residual too large after refinement");
  return X;
}

inline Matrix lqr_gain(const Matrix& A, const Matrix& B, const Matrix& Qw, const Matrix& R) {
  Matrix X = care_solve(A, B, Qw, R);
  return R.ldlt().solve(B.transpose() * X);
}

/// Augments the plant with integrals of the states selected by C
/// (x_I' = C x) and returns the LQI gain on the stacked state [x; x_I].
inline Matrix lqi_gain(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& Qw_aug,
                       const Matrix& R) {
  const Eigen::Index n = A.rows(), p = C.rows();
  Matrix A_aug = Matrix::Zero(n + p, n + p);
  A_aug.topLeftCorner(n, n) = A;
  A_aug.bottomLeftCorner(p, n) = C;
  Matrix B_aug = Matrix::Zero(n + p, B.cols());
  B_aug.topRows(n) = B;
  return lqr_gain(A_aug, B_aug, Qw_aug, R);
}

}  // namespace rejuv
