#pragma once

#include <optional>

#include "rejuv/ellipsoid.hpp"
#include "rejuv/reach.hpp"
#include "rejuv/safety.hpp"
#include "rejuv/scenario.hpp"

namespace rejuv {

/// Everything the certify step proves about a scenario.
struct CertificateReport {
  Matrix A_sc;
  double closed_loop_max_real = 0.0;
  InvariantEllipsoid ellipsoid;
  VerificationReport verification;
  double gamma = 0.0;
  double T_sc_bound = 0.0;
  TimingResult timing;
  double t_r = 0.0;
  bool feasible = false;
  double epsilon = 0.0;               // after tuning, if any
  ControlPolytope mc_limits;          // absolute; after tuning, if any
  double limit_scale = 1.0;
  std::optional<TuningOutcome> tuning;
};

/// synthesize -> decay rate -> T_SC bound -> T_UC search (-> tuning), then
/// t_r = T_UC - T_SR.
inline CertificateReport run_pipeline(const Scenario& scenario) {
  CertificateReport rep;
  rep.epsilon = scenario.epsilon;
  rep.mc_limits = scenario.mc_limits;

  auto [A_sc, max_re] = closed_loop_matrix(scenario.plant, scenario.K_safety);
  rep.A_sc = A_sc;
  rep.closed_loop_max_real = max_re;

  rep.ellipsoid = synthesize_max_ellipsoid(A_sc, scenario.constraints, scenario.solver);
  rep.verification = verify_ellipsoid(rep.ellipsoid.Q, A_sc, scenario.constraints,
                                      &rep.ellipsoid.P);
  if (!rep.verification.all_ok())
    throw SolverFailure("run_pipeline: synthesized ellipsoid failed verification");

  rep.gamma = decay_rate(A_sc, rep.ellipsoid.P);
  rep.T_sc_bound = safety_time_bound(rep.gamma, scenario.epsilon);

  const ControlPolytope U = scenario.mc_limits_deviation();
  rep.timing = find_T_UC(scenario.plant.A, scenario.plant.B, U, rep.ellipsoid.P,
                         scenario.epsilon, scenario.T_sr, scenario.grid_step, scenario.t_max);

  if (!rep.timing.feasible && scenario.tune) {
    TuningOutcome tuned =
        tune_feasibility(scenario.plant.A, scenario.plant.B, U, rep.ellipsoid.P, rep.gamma,
                         scenario.epsilon, scenario.T_sr, scenario.tune->strategy,
                         scenario.tune->schedule, scenario.grid_step, scenario.t_max);
    rep.timing = tuned.result;
    rep.epsilon = tuned.epsilon;
    rep.limit_scale = tuned.limit_scale;
    rep.T_sc_bound = safety_time_bound(rep.gamma, rep.epsilon);
    if (tuned.limit_scale != 1.0) {
      // Tightening applies to the deviation box; map back to absolute limits.
      Vector eq = scenario.equilibrium_input();
      rep.mc_limits = ControlPolytope{eq + tuned.limits.lower, eq + tuned.limits.upper};
    }
    rep.tuning = std::move(tuned);
  }

  rep.feasible = rep.timing.feasible;
  rep.t_r = rep.timing.T_uc - scenario.T_sr;
  return rep;
}

}  // namespace rejuv
