#pragma once

#include <cstdint>
#include <vector>

#include "randaccess/access_policy.hpp"
#include "randaccess/dual_optimizer.hpp"
#include "randaccess/random.hpp"

namespace randaccess {

enum class NoiseFamily {
  kGaussian,
  kUniform,  // zero mean, same covariance, bounded support
};

struct SimConfig {
  ProblemInstance instance;
  std::vector<AccessPolicy> policies;
  long horizon = 200000;
  std::uint64_t seed = 1;
  long burn_in = 20000;
  // Record every stride-th slot in the thinned trajectory; 0 disables it.
  long trajectory_stride = 0;
  NoiseFamily noise = NoiseFamily::kGaussian;

  // Throws std::invalid_argument unless horizon > burn_in >= 0 and there is one
  // policy per system.
  void validate() const;
};

struct TrajectorySample {
  long slot;
  int system;
  double lyapunov;
  int tx;
  int gamma;
};

struct SimMetrics {
  Vector empirical_cost;  // mean of x^T P x over the averaged slots
  Vector empirical_tx_rate;
  Vector empirical_success_rate;
  long slots_averaged = 0;
  std::vector<TrajectorySample> trajectory;

  friend bool operator==(const SimMetrics&, const SimMetrics&);
};

struct SlotOutcome {
  std::vector<Vector> next_states;
  std::vector<int> tx;
  std::vector<int> gamma;
};

// Slot-level model of the shared channel plus all plants. Precomputes the
// noise factors once; reusable across slots.
class SlotSimulator {
 public:
  explicit SlotSimulator(const SimConfig& cfg);

  // Draw channels, access decisions, pairwise collision events and decoding,
  // then advance every plant in its closed or open mode.
  SlotOutcome step(const std::vector<Vector>& states, RandomStream& rng) const;

  // Only the channel part: fills tx and gamma.
  void access(RandomStream& rng, std::vector<int>& tx, std::vector<int>& gamma) const;

  Vector noise(int i, RandomStream& rng) const;

 private:
  const SimConfig& cfg_;
  std::vector<Matrix> noise_factors_;
};

SlotOutcome simulate_slot(const std::vector<Vector>& states, const SimConfig& cfg,
                          RandomStream& rng);

// Runs horizon slots from x_0 = 0 and averages over the slots after burn_in.
// Throws SimulationUnstable when some state norm exceeds 1e12.
SimMetrics run_simulation(const SimConfig& cfg);

struct GammaRateCheck {
  double empirical = 0.0;
  double analytic = 0.0;
  double z_score = 0.0;
};

// Frequency of gamma_i = 1 over n_slots slot draws against the analytic link
// success probability (quadrature expectations).
std::vector<GammaRateCheck> empirical_gamma_rate_check(const SimConfig& cfg, long n_slots);

struct DriftCheck {
  double sample_mean = 0.0;
  double bound = 0.0;  // rho V(x) + Tr(P W)
  double standard_error = 0.0;
  double z_score = 0.0;
  bool within_bound = false;  // sample_mean <= bound + 4 SE
};

// Monte-Carlo estimate of E[V(x+) | x = x_probe] for one system, using one-step
// replications of the full slot model. Throws std::invalid_argument when the
// policies do not reach P(gamma = 1) >= c - feasibility_tol analytically.
DriftCheck lyapunov_drift_check(const SimConfig& cfg, int system, const Vector& x_probe,
                                long n_replications, double feasibility_tol = 1e-9);

}  // namespace randaccess
