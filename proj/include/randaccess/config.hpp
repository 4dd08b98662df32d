#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "randaccess/channel.hpp"
#include "randaccess/control.hpp"
#include "randaccess/dual_optimizer.hpp"
#include "randaccess/simulator.hpp"

namespace randaccess {

inline constexpr int kSchemaVersion = 1;

struct SimulationSettings {
  long horizon = 200000;
  std::uint64_t seed = 1;
  long burn_in = 20000;
  long trajectory_stride = 0;
  NoiseFamily noise = NoiseFamily::kGaussian;
};

struct ExperimentConfig {
  std::vector<SwitchedSystem> systems;
  std::vector<FadingChannel> channels;
  CollisionMatrix collision;
  Vector tx_powers;
  double rate_tol = 1e-9;  // bisection tolerance for the success targets
  OptimizerSettings optimizer;
  // Sampling knobs, kept even when quadrature is selected so the mode can be overridden.
  MonteCarlo monte_carlo;
  SimulationSettings simulation;
  std::string output_dir = "out";

  int size() const { return static_cast<int>(systems.size()); }
};

// Both throw ConfigError carrying the JSON path of the first offending field.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(std::string_view text);

}  // namespace randaccess
