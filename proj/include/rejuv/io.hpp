#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "rejuv/pipeline.hpp"
#include "rejuv/simulate.hpp"

namespace rejuv {

namespace detail {

/// 17 significant digits: doubles round-trip exactly through text.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("export: cannot write " + path);
  return out;
}

}  // namespace detail

inline void export_trace_csv(const SimulationTrace& trace, Eigen::Index n, Eigen::Index m,
                             const std::string& path) {
  auto out = detail::open_out(path);
  out << "t,mode";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < m; ++i) out << ",u" << i;
  out << ",attack,V,event\n";
  for (const auto& row : trace.rows) {
    out << detail::fmt(row.t) << ',' << mode_name(row.mode);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << detail::fmt(row.x(i));
    for (Eigen::Index i = 0; i < m; ++i) out << ',' << detail::fmt(row.u(i));
    out << ',' << (row.attack ? 1 : 0) << ',' << detail::fmt(row.V) << ',' << row.event << '\n';
  }
  if (!out) throw IoError("export: write failure on " + path);
}

inline json certificate_to_json(const CertificateReport& cert) {
  json j;
  j["schema"] = 1;
  j["feasible"] = cert.feasible;
  j["gamma"] = cert.gamma;
  j["T_SC_bound"] = cert.T_sc_bound;
  j["T_UC"] = cert.timing.T_uc;
  j["T_UC_raw"] = cert.timing.T_uc_raw;
  j["T_SR"] = cert.timing.T_sr;
  j["t_r"] = cert.t_r;
  j["epsilon"] = cert.epsilon;
  j["limit_scale"] = cert.limit_scale;
  j["closed_loop_max_real"] = cert.closed_loop_max_real;
  j["Q"] = detail::matrix_to_json(cert.ellipsoid.Q);
  j["P"] = detail::matrix_to_json(cert.ellipsoid.P);
  j["log_volume"] = cert.ellipsoid.log_volume;
  j["mc_limits"] = {{"lower", detail::vector_to_json(cert.mc_limits.lower)},
                    {"upper", detail::vector_to_json(cert.mc_limits.upper)}};
  j["verification"] = {{"lmi_max_eigenvalue", cert.verification.lmi_max_eigenvalue},
                       {"max_containment", cert.verification.max_containment},
                       {"min_eigenvalue_Q", cert.verification.min_eigenvalue_Q},
                       {"all_ok", cert.verification.all_ok()}};
  json diag = json::array();
  for (const auto& [t, v] : cert.timing.diagnostics) diag.push_back({{"t", t}, {"max_vertex_value", v}});
  j["reach_diagnostics"] = std::move(diag);
  if (cert.tuning) {
    json log = json::array();
    for (const auto& step : cert.tuning->log)
      log.push_back({{"epsilon", step.epsilon},
                     {"limit_scale", step.limit_scale},
                     {"T_UC", step.T_uc},
                     {"T_SC_bound", step.T_sc_bound}});
    j["tuning"] = {{"exhausted", cert.tuning->exhausted}, {"log", std::move(log)}};
  }
  return j;
}

inline void export_certificate(const CertificateReport& cert, const std::string& path) {
  auto out = detail::open_out(path);
  out << certificate_to_json(cert).dump(2) << '\n';
}

inline void export_validation(const ValidationReport& rep, const std::string& path) {
  json j;
  j["runs"] = rep.runs;
  j["violations"] = rep.violations;
  j["max_V"] = rep.max_V;
  j["max_sc_duration"] = rep.max_sc_duration;
  j["uc_steps"] = rep.uc_steps;
  j["uc_steps_safe"] = rep.uc_steps_safe;
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
}

/// Plot-data files: state/Lyapunov trajectory columns, mode bands, and the
/// reach-diagnostic table.
inline void export_plot_data(const SimulationTrace& trace, const CertificateReport& cert,
                             const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    auto out = detail::open_out((fs::path(dir) / "trajectory.csv").string());
    out << "t,px,py,pz,V,mode,attack\n";
    for (const auto& row : trace.rows) {
      const bool has3 = row.x.size() >= 3;
      out << detail::fmt(row.t) << ',' << detail::fmt(has3 ? row.x(0) : row.x(0)) << ','
          << detail::fmt(has3 ? row.x(1) : 0.0) << ',' << detail::fmt(has3 ? row.x(2) : 0.0)
          << ',' << detail::fmt(row.V) << ',' << mode_name(row.mode) << ','
          << (row.attack ? 1 : 0) << '\n';
    }
  }
  {
    auto out = detail::open_out((fs::path(dir) / "mode_timeline.csv").string());
    out << "t_start,t_end,mode,attacked\n";
    if (!trace.rows.empty()) {
      double start = trace.rows.front().t;
      Mode mode = trace.rows.front().mode;
      bool attacked = trace.rows.front().attack;
      for (std::size_t i = 1; i <= trace.rows.size(); ++i) {
        const bool boundary = i == trace.rows.size() || trace.rows[i].mode != mode ||
                              trace.rows[i].attack != attacked;
        if (boundary) {
          const double end = i == trace.rows.size() ? trace.rows.back().t : trace.rows[i].t;
          out << detail::fmt(start) << ',' << detail::fmt(end) << ',' << mode_name(mode) << ','
              << (attacked ? 1 : 0) << '\n';
          if (i < trace.rows.size()) {
            start = trace.rows[i].t;
            mode = trace.rows[i].mode;
            attacked = trace.rows[i].attack;
          }
        }
      }
    }
  }
  {
    auto out = detail::open_out((fs::path(dir) / "reach_diagnostics.csv").string());
    out << "t,max_vertex_value\n";
    for (const auto& [t, v] : cert.timing.diagnostics)
      out << detail::fmt(t) << ',' << detail::fmt(v) << '\n';
  }
}

}  // namespace rejuv
