#include "randaccess/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "randaccess/errors.hpp"
#include "randaccess/io.hpp"

namespace randaccess {

namespace fs = std::filesystem;

namespace {

std::string in_dir(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

SimConfig simulation_config(const ExperimentConfig& cfg, const std::vector<AccessPolicy>& policies) {
  SimConfig sc;
  sc.instance = build_instance(cfg);
  if (policies.size() != cfg.systems.size())
    throw ConfigError("policies", "expected " + std::to_string(cfg.size()) + " policies, got " +
                                      std::to_string(policies.size()));
  sc.policies = policies;
  sc.horizon = cfg.simulation.horizon;
  sc.seed = cfg.simulation.seed;
  sc.burn_in = cfg.simulation.burn_in;
  sc.trajectory_stride = cfg.simulation.trajectory_stride;
  sc.noise = cfg.simulation.noise;
  return sc;
}

std::string describe(const AccessPolicy& p) {
  std::ostringstream os;
  if (p.is_threshold()) os << "threshold " << format_double(p.threshold_value());
  else os << "constant rate " << format_double(p.rate());
  return os.str();
}

void apply_overrides(ExperimentConfig& cfg, const CommandRequest& req) {
  if (req.out_dir) cfg.output_dir = *req.out_dir;
  const bool optimizes = req.command == "optimize" || req.command == "pipeline";
  const bool simulates = req.command == "simulate" || req.command == "pipeline";
  if (req.mode) {
    if (*req.mode == "mc" || *req.mode == "monte_carlo") cfg.optimizer.mode = cfg.monte_carlo;
    else if (*req.mode == "quadrature") cfg.optimizer.mode = Quadrature{};
    else throw ConfigError("--mode", "expected quadrature or mc");
  }
  if (req.seed) {
    if (optimizes) {
      cfg.monte_carlo.seed = *req.seed;
      if (auto* mc = std::get_if<MonteCarlo>(&cfg.optimizer.mode)) mc->seed = *req.seed;
    }
    if (simulates) cfg.simulation.seed = *req.seed;
  }
  if (req.horizon) {
    if (*req.horizon < 1) throw ConfigError("--horizon", "horizon must be at least 1");
    cfg.simulation.horizon = *req.horizon;
    if (cfg.simulation.burn_in >= cfg.simulation.horizon) cfg.simulation.burn_in = cfg.simulation.horizon / 10;
  }
}

}  // namespace

Vector compute_requirements(const ExperimentConfig& cfg) {
  Vector c(cfg.size());
  for (int i = 0; i < cfg.size(); ++i) {
    try {
      c(i) = compute_success_requirement(cfg.systems[static_cast<std::size_t>(i)], cfg.rate_tol);
    } catch (const InfeasibleContract& e) {
      throw InfeasibleContract("system " + std::to_string(i) + ": " + e.what());
    }
  }
  return c;
}

ProblemInstance build_instance(const ExperimentConfig& cfg) {
  const Vector c = compute_requirements(cfg);
  for (int i = 0; i < cfg.size(); ++i) {
    if (c(i) <= 0.0)
      throw ConfigError("systems[" + std::to_string(i) + "]",
                        "the open loop already meets the Lyapunov contract (requirement 0); nothing to schedule");
    if (c(i) >= 1.0)
      throw InfeasibleContract("system " + std::to_string(i) +
                               " needs every packet delivered, which no fading channel provides");
  }
  ProblemInstance inst{cfg.systems, cfg.channels, cfg.collision, cfg.tx_powers, c};
  inst.validate();
  return inst;
}

Vector cmd_rates(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& out) {
  const Vector c = compute_requirements(cfg);
  ensure_dir(out_dir);
  write_rates_csv(in_dir(out_dir, "rates.csv"), c);
  out << "success requirements\n";
  for (int i = 0; i < c.size(); ++i) out << "  system " << i << ": c = " << format_double(c(i)) << '\n';
  return c;
}

OptimizationResult cmd_optimize(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& out) {
  const ProblemInstance inst = build_instance(cfg);
  ensure_dir(out_dir);
  OptimizationResult result = optimize_access_policies(inst, cfg.optimizer);
  write_trace_csv(in_dir(out_dir, "trace.csv"), result.trace);
  write_policy_file(in_dir(out_dir, "policies.json"), policy_file_from(result));

  out << "optimization " << (result.converged ? "converged" : "did not converge") << " after "
      << result.trace.size() << " periods\n";
  if (!result.trace.empty()) {
    const IterationRecord& last = result.trace.back();
    out << "  objective " << format_double(last.objective) << ", dual value " << format_double(last.dual_value)
        << '\n';
    for (int i = 0; i < inst.size(); ++i)
      out << "  system " << i << ": " << describe(result.policies[static_cast<std::size_t>(i)]) << ", tx rate "
          << format_double(last.rate(i)) << ", P(gamma = 1) " << format_double(last.link(i)) << " vs c "
          << format_double(inst.success_targets(i)) << '\n';
  }
  return result;
}

SimMetrics cmd_simulate(const ExperimentConfig& cfg, const std::vector<AccessPolicy>& policies,
                        const std::string& out_dir, std::ostream& out) {
  const SimConfig sc = simulation_config(cfg, policies);
  ensure_dir(out_dir);
  SimMetrics metrics = run_simulation(sc);
  write_metrics_csv(in_dir(out_dir, "metrics.csv"), metrics, sc.instance, sc.policies);
  if (sc.trajectory_stride > 0) write_trajectory_csv(in_dir(out_dir, "trajectory.csv"), metrics);

  out << "simulation of " << sc.horizon << " slots (" << sc.burn_in << " burn-in), seed " << sc.seed << '\n';
  for (int i = 0; i < sc.instance.size(); ++i) {
    const double c = sc.instance.success_targets(i);
    const double rate = metrics.empirical_tx_rate(i);
    out << "  system " << i << ": cost " << format_double(metrics.empirical_cost(i)) << " (bound "
        << format_double(steady_state_cost_bound(sc.instance.systems[static_cast<std::size_t>(i)]))
        << "), tx rate " << format_double(rate) << (rate > c ? " > " : " <= ") << "c " << format_double(c)
        << ", success rate " << format_double(metrics.empirical_success_rate(i)) << '\n';
  }
  return metrics;
}

int run_command(const CommandRequest& req, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig cfg = parse_config(req.config_path);
    apply_overrides(cfg, req);
    const std::string& dir = cfg.output_dir;

    if (req.command == "rates") {
      cmd_rates(cfg, dir, out);
      return kExitOk;
    }
    if (req.command == "optimize") {
      const OptimizationResult r = cmd_optimize(cfg, dir, out);
      return r.converged ? kExitOk : kExitNotConverged;
    }
    if (req.command == "simulate") {
      if (!req.policies_path) throw ConfigError("--policies", "simulate needs a policy file");
      cmd_simulate(cfg, read_policy_file(*req.policies_path).policies, dir, out);
      return kExitOk;
    }
    if (req.command == "pipeline") {
      cmd_rates(cfg, dir, out);
      const OptimizationResult r = cmd_optimize(cfg, dir, out);
      if (!r.converged) {
        err << "error: optimizer stopped after " << r.trace.size()
            << " periods without meeting the stopping rule; not simulating\n";
        return kExitNotConverged;
      }
      // Simulate what was persisted, so the report reflects the policy file.
      cmd_simulate(cfg, read_policy_file(in_dir(dir, "policies.json")).policies, dir, out);
      return kExitOk;
    }
    err << "error: unknown command " << req.command << '\n';
    return kExitParse;
  } catch (const ConfigError& e) {
    err << "error: invalid configuration: " << e.what() << '\n';
    return kExitParse;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const InfeasibleContract& e) {
    err << "error: infeasible Lyapunov contract: " << e.what() << '\n';
    return kExitInfeasibleContract;
  } catch (const InfeasibleInstance& e) {
    err << "error: infeasible access design: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const SimulationUnstable& e) {
    err << "error: simulation unstable: " << e.what() << '\n';
    return kExitUnstable;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace randaccess
