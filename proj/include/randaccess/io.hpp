#pragma once

#include <string>
#include <vector>

#include "randaccess/access_policy.hpp"
#include "randaccess/dual_optimizer.hpp"
#include "randaccess/simulator.hpp"

namespace randaccess {

// Shortest text that parses back to the same double; "inf", "-inf", "nan" for
// non-finite values.
std::string format_double(double v);

struct PolicyFile {
  std::vector<AccessPolicy> policies;
  Vector lambda;
  Matrix nu;
  bool converged = false;
  long periods = 0;
};

PolicyFile policy_file_from(const OptimizationResult& result);

// Throw IoError when the file cannot be opened; read_policy_file throws
// ConfigError on malformed content.
void write_policy_file(const std::string& path, const PolicyFile& file);
PolicyFile read_policy_file(const std::string& path);

// CSV writers. Every file starts with a header row.
void write_rates_csv(const std::string& path, const Vector& requirements);
void write_trace_csv(const std::string& path, const IterationTrace& trace);
void write_metrics_csv(const std::string& path, const SimMetrics& metrics, const ProblemInstance& inst,
                       const std::vector<AccessPolicy>& policies);
void write_trajectory_csv(const std::string& path, const SimMetrics& metrics);

}  // namespace randaccess
