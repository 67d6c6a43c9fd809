// Command-line front end: certify / simulate / validate / tune a rejuvenation
// scenario and export traces, certificates, and plot data.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rejuv/io.hpp"
#include "rejuv/pipeline.hpp"
#include "rejuv/simulate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitViolation = 3;
constexpr int kExitConfig = 4;

int log_level() {
  const char* env = std::getenv("REJUV_LOG");
  return env ? std::atoi(env) : 1;
}

void print_certificate(const rejuv::CertificateReport& cert) {
  std::cout << "feasible:   " << (cert.feasible ? "yes" : "no") << "\n"
            << "gamma:      " << cert.gamma << "\n"
            << "T_SC_bound: " << cert.T_sc_bound << " s\n"
            << "T_UC:       " << cert.timing.T_uc << " s (raw " << cert.timing.T_uc_raw << ")\n"
            << "T_SR:       " << cert.timing.T_sr << " s\n"
            << "t_r:        " << cert.t_r << " s\n"
            << "epsilon:    " << cert.epsilon << "\n"
            << "log det Q:  " << cert.ellipsoid.log_volume << "\n";
  if (cert.tuning) {
    std::cout << "tuning steps: " << cert.tuning->log.size()
              << (cert.tuning->exhausted ? " (exhausted)" : "") << "\n";
    if (log_level() > 1) {
      for (const auto& s : cert.tuning->log)
        std::cout << "  eps=" << s.epsilon << " scale=" << s.limit_scale << " T_UC=" << s.T_uc
                  << " T_SC_bound=" << s.T_sc_bound << "\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe-timing synthesis and attack simulation for software-rejuvenation control"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  std::string attack_name;
  int runs = 100;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string strategy = "epsilon";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("scenario", scenario_path, "Scenario file (JSON)")->required();
    cmd->add_option("--out", out_dir, "Artifact output directory");
  };

  CLI::App* certify = app.add_subcommand("certify", "Synthesize the safety certificate");
  add_common(certify);

  CLI::App* simulate = app.add_subcommand("simulate", "Run one closed-loop simulation");
  add_common(simulate);
  simulate->add_option("--attack", attack_name,
                       "Keep only attacks of this kind (turn_off|take_over|random_box|none)");

  CLI::App* validate = app.add_subcommand("validate", "Monte Carlo attack validation");
  add_common(validate);
  validate->add_option("--runs", runs, "Number of randomized runs");
  validate->add_option("--seed", seed, "Base seed")->each([&](const std::string&) { seed_set = true; });

  CLI::App* tune = app.add_subcommand("tune", "Search feasible timing via a tuning strategy");
  add_common(tune);
  tune->add_option("--strategy", strategy, "epsilon | limits");

  CLI11_PARSE(app, argc, argv);

  try {
    rejuv::Scenario scenario = rejuv::load_scenario_file(scenario_path);
    std::filesystem::create_directories(out_dir);

    if (tune->parsed()) {
      rejuv::TuneRequest req;
      if (strategy == "epsilon") req.strategy = rejuv::TuneStrategy::shrink_epsilon;
      else if (strategy == "limits") req.strategy = rejuv::TuneStrategy::tighten_limits;
      else throw rejuv::ConfigError("tune: unknown strategy '" + strategy + "'");
      if (scenario.tune) req.schedule = scenario.tune->schedule;
      scenario.tune = req;
    }

    rejuv::CertificateReport cert = rejuv::run_pipeline(scenario);
    print_certificate(cert);
    rejuv::export_certificate(cert, (std::filesystem::path(out_dir) / "certificate.json").string());

    if (certify->parsed() || tune->parsed()) {
      return cert.feasible ? kExitOk : kExitInfeasible;
    }
    if (!cert.feasible) {
      std::cerr << "error: infeasible certificate (T_UC <= T_SR)\n";
      return kExitInfeasible;
    }

    if (simulate->parsed()) {
      if (attack_name == "none") {
        scenario.attacks.clear();
      } else if (!attack_name.empty()) {
        std::erase_if(scenario.attacks, [&](const rejuv::AttackWindow& w) {
          switch (w.kind) {
            case rejuv::quad::AttackKind::turn_off: return attack_name != "turn_off";
            case rejuv::quad::AttackKind::take_over: return attack_name != "take_over";
            case rejuv::quad::AttackKind::random_box: return attack_name != "random_box";
          }
          return true;
        });
      }
      rejuv::SimulationTrace trace = rejuv::simulate(scenario, cert);
      rejuv::export_trace_csv(trace, scenario.state_dim(), scenario.input_dim(),
                              (std::filesystem::path(out_dir) / "trace.csv").string());
      rejuv::export_plot_data(trace, cert, out_dir);
      std::cout << "steps:      " << trace.rows.size() << "\n"
                << "max V:      " << trace.max_V << "\n"
                << "max SC:     " << trace.max_sc_duration << " s\n"
                << "violation:  " << (trace.safety_violation ? "YES" : "no") << "\n";
      return trace.safety_violation ? kExitViolation : kExitOk;
    }

    if (validate->parsed()) {
      if (!seed_set) seed = scenario.seed;
      rejuv::ValidationReport rep = rejuv::monte_carlo_validate(scenario, cert, runs, seed);
      rejuv::export_validation(rep, (std::filesystem::path(out_dir) / "validation.json").string());
      std::cout << "runs:       " << rep.runs << "\n"
                << "violations: " << rep.violations << "\n"
                << "max V:      " << rep.max_V << "\n"
                << "max SC:     " << rep.max_sc_duration << " s\n";
      return rep.violations == 0 ? kExitOk : kExitViolation;
    }
  } catch (const rejuv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const rejuv::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  }
  return kExitOk;
}
