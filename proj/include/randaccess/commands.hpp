#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "randaccess/config.hpp"
#include "randaccess/dual_optimizer.hpp"
#include "randaccess/simulator.hpp"

namespace randaccess {

enum ExitCode : int {
  kExitOk = 0,
  kExitIo = 1,
  kExitParse = 2,
  kExitInfeasibleContract = 3,
  kExitDivergence = 4,
  kExitUnstable = 5,
  kExitNotConverged = 6,
  kExitInternal = 7,
};

struct CommandRequest {
  std::string command;  // rates, optimize, simulate or pipeline
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::string> mode;  // "quadrature" or "mc"
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policies_path;
  std::optional<long> horizon;
};

// Success targets of every system; failures name the system.
Vector compute_requirements(const ExperimentConfig& cfg);
ProblemInstance build_instance(const ExperimentConfig& cfg);

// Each stage writes its artifacts into out_dir and a short table to out.
Vector cmd_rates(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& out);
OptimizationResult cmd_optimize(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& out);
SimMetrics cmd_simulate(const ExperimentConfig& cfg, const std::vector<AccessPolicy>& policies,
                        const std::string& out_dir, std::ostream& out);

// Applies the overrides in req, runs the command and maps failures to exit codes.
int run_command(const CommandRequest& req, std::ostream& out, std::ostream& err);

}  // namespace randaccess
