#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "rejuv/errors.hpp"

namespace rejuv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Matrix exponential e^{M t} by scaling-and-squaring with a Pade core.
/// Inputs with ||M t||_inf above `norm_cap` are rejected.
inline Matrix matrix_exponential(const Matrix& M, double t, double norm_cap = 50.0) {
  if (M.rows() != M.cols()) throw DomainError("matrix_exponential: matrix not square");
  if (!M.allFinite() || !std::isfinite(t)) throw DomainError("matrix_exponential: non-finite input");
  Matrix Mt = M * t;
  const double norm = Mt.cwiseAbs().rowwise().sum().maxCoeff();
  if (norm > norm_cap) {
    throw Overflow("matrix_exponential: ||Mt|| = " + std::to_string(norm) +
                   " exceeds cap " + std::to_string(norm_cap));
  }
  return Mt.exp();
}

/// Solves the continuous-time Lyapunov equation A^T X + X A = -W via the
/// Kronecker form. Intended for the moderate dimensions used here (n <= 15).
inline Matrix lyapunov_solve(const Matrix& A, const Matrix& W) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || W.rows() != n || W.cols() != n)
    throw DomainError("lyapunov_solve: dimension mismatch");
  Matrix I = Matrix::Identity(n, n);
  // vec(A^T X + X A) = (I (x) A^T + A^T (x) I) vec(X)
  Matrix K = Matrix::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k) {
        K(i + j * n, k + j * n) += A(k, i);  // I (x) A^T
        K(i + j * n, i + k * n) += A(k, j);  // A^T (x) I
      }
  Vector w = Eigen::Map<const Vector>(W.data(), n * n);
  Vector x = K.partialPivLu().solve(-w);
  Matrix X = Eigen::Map<Matrix>(x.data(), n, n);
  return 0.5 * (X + X.transpose());
}

/// Largest real part over the spectrum of a (generally nonsymmetric) matrix.
inline double max_real_eigenvalue(const Matrix& M) {
  Eigen::EigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

inline bool is_hurwitz(const Matrix& M, double margin = 1e-9) {
  return max_real_eigenvalue(M) < -margin;
}

/// lambda_max of a symmetric matrix (input symmetrized).
inline double sym_max_eigenvalue(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

inline double sym_min_eigenvalue(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline bool is_positive_definite(const Matrix& S) {
  Eigen::LLT<Matrix> llt(0.5 * (S + S.transpose()));
  return llt.info() == Eigen::Success;
}

}  // namespace rejuv
