#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "rejuv/linalg.hpp"
#include "rejuv/plant.hpp"

namespace rejuv {

/// Half-space set {x : alpha_i^T x <= b_i}.
struct HalfspaceSet {
  std::vector<Vector> normals;
  std::vector<double> offsets;

  void validate() const {
    if (normals.size() != offsets.size())
      throw ConfigError("HalfspaceSet: normal/offset count mismatch");
    for (const auto& a : normals)
      if (!a.allFinite() || a.norm() == 0.0)
        throw ConfigError("HalfspaceSet: normals must be nonzero and finite");
    for (double b : offsets)
      if (!std::isfinite(b)) throw ConfigError("HalfspaceSet: non-finite offset");
  }
};

/// Face layout used throughout the reach computation: for each coordinate k,
/// face 2k has normal +e_k and face 2k+1 has normal -e_k.
inline std::vector<Vector> box_normals(Eigen::Index n) {
  std::vector<Vector> normals;
  normals.reserve(static_cast<std::size_t>(2 * n));
  for (Eigen::Index k = 0; k < n; ++k) {
    Vector e = Vector::Zero(n);
    e(k) = 1.0;
    normals.push_back(e);
    normals.push_back(-e);
  }
  return normals;
}

/// Tightest polytope with the given normals containing the inner set
/// E_eps = {x : x^T P x <= eps}: offsets are the support values
/// b_i = sqrt(eps * alpha_i^T P^{-1} alpha_i).
inline HalfspaceSet bounding_polytope(const Matrix& P, double epsilon,
                                      const std::vector<Vector>& normals) {
  if (!is_positive_definite(P)) throw DomainError("bounding_polytope: P not SPD");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw DomainError("bounding_polytope: epsilon must be in (0, 1)");
  const Eigen::Index n = P.rows();
  // Boundedness check (box-oriented): every coordinate needs a face on each side.
  for (Eigen::Index k = 0; k < n; ++k) {
    bool pos = false, neg = false;
    for (const auto& a : normals) {
      if (a(k) > 0.0) pos = true;
      if (a(k) < 0.0) neg = true;
    }
    if (!pos || !neg)
      throw UnboundedPolytope("bounding_polytope: normals leave coordinate " +
                              std::to_string(k) + " unbounded");
  }
  Matrix Pinv = P.ldlt().solve(Matrix::Identity(n, n));
  HalfspaceSet hs;
  hs.normals = normals;
  hs.offsets.reserve(normals.size());
  for (const auto& a : normals)
    hs.offsets.push_back(std::sqrt(epsilon * double(a.transpose() * Pinv * a)));
  return hs;
}

/// Time-stamped over-approximation of the reach set under box-bounded inputs.
/// In transformed coordinates y = e^{-At} x the set is the axis box with the
/// stored offsets; vertices are the forward images of its corners.
struct ReachOverapprox {
  double t = 0.0;
  Matrix forward_map;               // e^{At}
  std::vector<double> box_offsets;  // face layout as in box_normals
  std::vector<Vector> vertices;
};

/// true iff max_i x_i^T P x_i <= 1 over the vertex list; convexity of the
/// quadratic makes the vertex check exact for the polytope.
inline bool contained_in_ellipsoid(const ReachOverapprox& reach, const Matrix& P) {
  if (reach.vertices.empty())
    throw DomainError("contained_in_ellipsoid: empty vertex list");
  for (const auto& v : reach.vertices)
    if (v.dot(P * v) > 1.0) return false;
  return true;
}

namespace detail {

/// Incremental face-offset integrator for the supporting-hyperplane
/// over-approximation. Normals evolve as e^{-A^T tau} alpha_i; each face
/// offset accumulates the worst-case input contribution
/// int_0^t max_j <alpha_i(tau), B u_j> dtau, evaluated channelwise over the
/// box corners. Trapezoid at the fine step with a half-rate companion sum
/// for a Richardson consistency check.
class ReachEngine {
 public:
  ReachEngine(const Matrix& A, const Matrix& B, const ControlPolytope& U,
              const HalfspaceSet& init, double quad_step)
      : A_(A), B_(B), U_(U), h_(quad_step), n_(A.rows()) {
    if (A.rows() != A.cols() || B.rows() != A.rows())
      throw ConfigError("ReachEngine: dimension mismatch");
    U.validate();
    if (U.dim() != B.cols()) throw ConfigError("ReachEngine: input dimension mismatch");
    if (!(quad_step > 0.0)) throw ConfigError("ReachEngine: quad_step must be positive");
    check_box_layout(init);
    base_offsets_ = init.offsets;
    integral_fine_.assign(base_offsets_.size(), 0.0);
    integral_coarse_.assign(base_offsets_.size(), 0.0);
    M_ = Matrix::Identity(n_, n_);
    Minv_ = Matrix::Identity(n_, n_);
    step_back_ = matrix_exponential(-A_.transpose(), h_);
    step_fwd_ = matrix_exponential(A_, h_);
    g_curr_ = integrand();
    steps_ = 0;
  }

  double time() const { return double(steps_) * h_; }

  /// Advances by two fine quadrature steps (one coarse step).
  void advance_pair() {
    std::vector<double> g0 = g_curr_;
    step_once();
    std::vector<double> g1 = g_curr_;
    step_once();
    std::vector<double> g2 = g_curr_;
    for (std::size_t i = 0; i < g0.size(); ++i) {
      integral_fine_[i] += h_ * (0.5 * g0[i] + g1[i] + 0.5 * g2[i]);
      integral_coarse_[i] += h_ * (g0[i] + g2[i]);
    }
  }

  /// Richardson disagreement must stay below tol relative to the offsets.
  void check_quadrature(double tol = 1e-6) const {
    for (std::size_t i = 0; i < integral_fine_.size(); ++i) {
      const double off = base_offsets_[i] + integral_fine_[i];
      const double err = std::abs(integral_fine_[i] - integral_coarse_[i]) / 3.0;
      if (err > tol * std::max(std::abs(off), 1e-12))
        throw QuadratureError("reach quadrature: Richardson disagreement " +
                              std::to_string(err) + " on face " + std::to_string(i));
    }
  }

  std::vector<double> offsets() const {
    std::vector<double> off(base_offsets_);
    for (std::size_t i = 0; i < off.size(); ++i) off[i] += integral_fine_[i];
    return off;
  }

  const Matrix& forward_map() const { return Minv_; }

  /// Max of y^T (F^T P F) y over the box corners, F the forward map.
  double max_vertex_value(const Matrix& P) const {
    Matrix G = Minv_.transpose() * P * Minv_;
    const auto off = offsets();
    if (n_ > 26) throw ConfigError("ReachEngine: vertex enumeration capped at n = 26");
    const std::uint64_t count = std::uint64_t(1) << n_;
    double best = 0.0;
    Vector y(n_);
    for (std::uint64_t mask = 0; mask < count; ++mask) {
      for (Eigen::Index k = 0; k < n_; ++k)
        y(k) = (mask >> k) & 1 ? off[std::size_t(2 * k)] : -off[std::size_t(2 * k + 1)];
      best = std::max(best, y.dot(G * y));
    }
    return best;
  }

  ReachOverapprox snapshot() const {
    ReachOverapprox r;
    r.t = time();
    r.forward_map = Minv_;
    r.box_offsets = offsets();
    if (n_ > 26) throw ConfigError("ReachEngine: vertex enumeration capped at n = 26");
    const std::uint64_t count = std::uint64_t(1) << n_;
    r.vertices.reserve(count);
    Vector y(n_);
    for (std::uint64_t mask = 0; mask < count; ++mask) {
      for (Eigen::Index k = 0; k < n_; ++k)
        y(k) = (mask >> k) & 1 ? r.box_offsets[std::size_t(2 * k)]
                               : -r.box_offsets[std::size_t(2 * k + 1)];
      r.vertices.push_back(Minv_ * y);
    }
    return r;
  }

  static void check_box_layout(const HalfspaceSet& init) {
    init.validate();
    if (init.normals.empty()) throw ConfigError("ReachEngine: empty initial polytope");
    const Eigen::Index n = init.normals.front().size();
    if (Eigen::Index(init.normals.size()) != 2 * n)
      throw ConfigError("ReachEngine: initial polytope must be in box-normal form");
    for (Eigen::Index k = 0; k < n; ++k) {
      Vector e = Vector::Zero(n);
      e(k) = 1.0;
      if ((init.normals[std::size_t(2 * k)] - e).cwiseAbs().maxCoeff() > 1e-12 ||
          (init.normals[std::size_t(2 * k + 1)] + e).cwiseAbs().maxCoeff() > 1e-12)
        throw ConfigError("ReachEngine: initial polytope must use +/- e_k normals");
    }
  }

 private:
  void step_once() {
    M_ = step_back_ * M_;
    Minv_ = step_fwd_ * Minv_;
    ++steps_;
    g_curr_ = integrand();
  }

  /// g_i = max_j <alpha_i(tau), B u_j> computed channelwise:
  /// sum_k max(l_k c_k, u_k c_k) with c = B^T alpha_i(tau).
  std::vector<double> integrand() const {
    Matrix C = B_.transpose() * M_;  // column k is B^T e^{-A^T tau} e_k
    std::vector<double> g(std::size_t(2 * n_), 0.0);
    for (Eigen::Index k = 0; k < n_; ++k) {
      double plus = 0.0, minus = 0.0;
      for (Eigen::Index c = 0; c < C.rows(); ++c) {
        const double v = C(c, k);
        plus += std::max(U_.lower(c) * v, U_.upper(c) * v);
        minus += std::max(U_.lower(c) * -v, U_.upper(c) * -v);
      }
      g[std::size_t(2 * k)] = plus;
      g[std::size_t(2 * k + 1)] = minus;
    }
    return g;
  }

  Matrix A_, B_;
  ControlPolytope U_;
  double h_;
  Eigen::Index n_;
  std::vector<double> base_offsets_;
  std::vector<double> integral_fine_, integral_coarse_;
  Matrix M_, Minv_, step_back_, step_fwd_;
  std::vector<double> g_curr_;
  long steps_ = 0;
};

}  // namespace detail

/// Reach-set over-approximation at a single time point.
inline ReachOverapprox reach_overapprox_at(const Matrix& A, const Matrix& B,
                                           const ControlPolytope& U,
                                           const HalfspaceSet& init, double t,
                                           double quad_step) {
  if (t < 0.0) throw DomainError("reach_overapprox_at: t must be nonnegative");
  if (t == 0.0) {
    detail::ReachEngine engine(A, B, U, init, quad_step);
    return engine.snapshot();
  }
  // Land exactly on t with an even number of fine steps.
  long pairs = std::max(1L, std::lround(t / (2.0 * quad_step)));
  detail::ReachEngine engine(A, B, U, init, t / double(2 * pairs));
  for (long i = 0; i < pairs; ++i) engine.advance_pair();
  engine.check_quadrature();
  return engine.snapshot();
}

struct TimingResult {
  double T_uc = 0.0;      // certified value (one grid step below the raw search result)
  double T_uc_raw = 0.0;  // largest grid time with verified containment
  double T_sr = 0.0;
  double grid_step = 0.0;
  bool feasible = false;
  double epsilon = 0.0;
  std::vector<std::pair<double, double>> diagnostics;  // (time, max vertex x^T P x)
};

/// Largest grid time T_UC with R+(P, t) inside E_C for every grid time in
/// [0, T_UC], reported with a one-grid-step conservative margin. Feasible iff
/// T_UC > T_SR.
inline TimingResult find_T_UC(const Matrix& A, const Matrix& B, const ControlPolytope& U,
                              const Matrix& P, double epsilon, double T_sr,
                              double grid_step = 0.01, double t_max = 10.0) {
  if (!(grid_step > 0.0)) throw DomainError("find_T_UC: grid_step must be positive");
  HalfspaceSet init = bounding_polytope(P, epsilon, box_normals(P.rows()));
  detail::ReachEngine engine(A, B, U, init, grid_step / 10.0);

  TimingResult result;
  result.T_sr = T_sr;
  result.grid_step = grid_step;
  result.epsilon = epsilon;

  double v0 = engine.max_vertex_value(P);
  if (v0 > 1.0)
    throw InfeasibleAtZero("find_T_UC: bounding polytope of E_eps exceeds E_C at t = 0 (max value " +
                           std::to_string(v0) + ")");
  result.diagnostics.emplace_back(0.0, v0);

  double last_contained = 0.0;
  while (engine.time() < t_max - 0.5 * grid_step) {
    for (int i = 0; i < 5; ++i) engine.advance_pair();  // one grid step
    engine.check_quadrature();
    const double v = engine.max_vertex_value(P);
    result.diagnostics.emplace_back(engine.time(), v);
    if (v > 1.0) break;
    last_contained = engine.time();
  }
  result.T_uc_raw = last_contained;
  result.T_uc = std::max(0.0, last_contained - grid_step);
  result.feasible = result.T_uc > T_sr;
  return result;
}

enum class TuneStrategy { shrink_epsilon, tighten_limits };

struct TuneSchedule {
  double epsilon_factor = 0.5;
  double limits_factor = 0.8;
  int max_iter = 20;
};

struct TuneStep {
  double epsilon;
  double limit_scale;
  double T_uc;
  double T_sc_bound;
};

struct TuningOutcome {
  TimingResult result;
  double epsilon = 0.0;
  double limit_scale = 1.0;  // cumulative factor applied to the MC/SR limits
  ControlPolytope limits;
  std::vector<TuneStep> log;
  bool exhausted = false;
};

inline double safety_time_bound_or_inf(double gamma, double epsilon) {
  if (!(gamma > 0.0) || !(epsilon > 0.0 && epsilon <= 1.0))
    return std::numeric_limits<double>::infinity();
  return -std::log(epsilon) / gamma;
}

/// Iterates one of two feasibility strategies: shrink the inner
/// set or tighten the protected control limits, recomputing T_UC each step.
inline TuningOutcome tune_feasibility(const Matrix& A, const Matrix& B,
                                      const ControlPolytope& U, const Matrix& P,
                                      double gamma, double epsilon, double T_sr,
                                      TuneStrategy strategy, const TuneSchedule& schedule = {},
                                      double grid_step = 0.01, double t_max = 10.0) {
  TuningOutcome out;
  out.epsilon = epsilon;
  out.limits = U;
  out.result = find_T_UC(A, B, U, P, epsilon, T_sr, grid_step, t_max);
  if (out.result.feasible) return out;  // already feasible, empty tuning log

  for (int iter = 0; iter < schedule.max_iter; ++iter) {
    if (strategy == TuneStrategy::shrink_epsilon) {
      out.epsilon *= schedule.epsilon_factor;
    } else {
      out.limit_scale *= schedule.limits_factor;
      out.limits = ControlPolytope{U.lower * out.limit_scale, U.upper * out.limit_scale};
    }
    out.result = find_T_UC(A, B, out.limits, P, out.epsilon, T_sr, grid_step, t_max);
    out.log.push_back(TuneStep{out.epsilon, out.limit_scale, out.result.T_uc,
                               safety_time_bound_or_inf(gamma, out.epsilon)});
    if (out.result.feasible) return out;
  }
  out.exhausted = true;
  return out;
}

}  // namespace rejuv
