#pragma once

#include <utility>
#include <vector>

#include "rejuv/linalg.hpp"

namespace rejuv {

/// Linearized dynamics xdot = A x + B u about an equilibrium. States are
/// stored as deviations, so the equilibrium maps to the origin internally.
struct LinearPlant {
  Matrix A;
  Matrix B;
  Vector x_e;

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index input_dim() const { return B.cols(); }

  void validate() const {
    if (A.rows() != A.cols()) throw ConfigError("LinearPlant: A not square");
    if (B.rows() != A.rows()) throw ConfigError("LinearPlant: rows(B) != n");
    if (x_e.size() != A.rows()) throw ConfigError("LinearPlant: x_e dimension mismatch");
    if (!A.allFinite() || !B.allFinite() || !x_e.allFinite())
      throw ConfigError("LinearPlant: non-finite entries");
  }
};

/// Polyhedral operating region {x : xi_j^T x <= 1}. Constraints given as
/// a^T x <= b (b > 0) are normalized to the offset-1 form at load time.
struct PolyhedralConstraints {
  std::vector<Vector> normals;  // xi_j

  std::size_t size() const { return normals.size(); }

  static PolyhedralConstraints from_rows(const Matrix& a_rows, const Vector& b) {
    if (a_rows.rows() != b.size())
      throw ConfigError("constraints: row/offset count mismatch");
    PolyhedralConstraints c;
    c.normals.reserve(static_cast<std::size_t>(a_rows.rows()));
    for (Eigen::Index j = 0; j < a_rows.rows(); ++j) {
      if (b(j) <= 0.0) throw ConfigError("constraints: offsets must be positive");
      c.normals.push_back(a_rows.row(j).transpose() / b(j));
    }
    c.validate();
    return c;
  }

  /// Symmetric box |x_k| <= bound_k as 2n half-spaces.
  static PolyhedralConstraints axis_box(const Vector& bounds) {
    PolyhedralConstraints c;
    const Eigen::Index n = bounds.size();
    for (Eigen::Index k = 0; k < n; ++k) {
      if (bounds(k) <= 0.0) throw ConfigError("constraints: box bound must be positive");
      Vector e = Vector::Zero(n);
      e(k) = 1.0 / bounds(k);
      c.normals.push_back(e);
      c.normals.push_back(-e);
    }
    return c;
  }

  void validate() const {
    for (const auto& xi : normals) {
      if (!xi.allFinite() || xi.norm() == 0.0)
        throw ConfigError("constraints: normals must be nonzero and finite");
    }
  }
};

/// Per-channel admissible input box U; vertex set is the 2^m box corners.
struct ControlPolytope {
  Vector lower;
  Vector upper;

  Eigen::Index dim() const { return lower.size(); }

  void validate() const {
    if (lower.size() != upper.size()) throw ConfigError("ControlPolytope: dimension mismatch");
    if (!lower.allFinite() || !upper.allFinite())
      throw ConfigError("ControlPolytope: non-finite bounds");
    if ((lower.array() > upper.array()).any())
      throw ConfigError("ControlPolytope: lower > upper");
  }

  ControlPolytope scaled(double factor) const {
    return ControlPolytope{lower * factor, upper * factor};
  }

  bool contains(const ControlPolytope& other) const {
    return (lower.array() <= other.lower.array()).all() &&
           (upper.array() >= other.upper.array()).all();
  }
};

/// A_SC = A - B K, with the dominant eigenvalue reported. Throws when the
/// closed loop is not Hurwitz.
inline std::pair<Matrix, double> closed_loop_matrix(const LinearPlant& plant, const Matrix& K) {
  plant.validate();
  if (K.rows() != plant.input_dim() || K.cols() != plant.state_dim())
    throw ConfigError("closed_loop_matrix: gain dimension mismatch");
  if (!K.allFinite()) throw ConfigError("closed_loop_matrix: non-finite gain");
  Matrix A_sc = plant.A - plant.B * K;
  const double max_re = max_real_eigenvalue(A_sc);
  if (max_re >= -1e-9)
    throw NotHurwitz("closed_loop_matrix: max eigenvalue real part " + std::to_string(max_re));
  return {std::move(A_sc), max_re};
}

}  // namespace rejuv
