#pragma once

#include <vector>

#include "randaccess/access_policy.hpp"
#include "randaccess/channel.hpp"
#include "randaccess/control.hpp"
#include "randaccess/linalg.hpp"

namespace randaccess {

// The access design problem: minimize total expected transmit power subject to
// every link meeting its packet-success requirement.
struct ProblemInstance {
  std::vector<SwitchedSystem> systems;
  std::vector<FadingChannel> channels;
  CollisionMatrix collision;
  Vector tx_powers;
  Vector success_targets;

  int size() const { return static_cast<int>(systems.size()); }

  // Throws std::invalid_argument unless all lengths agree, m >= 1, powers are
  // positive and targets lie strictly inside (0, 1).
  void validate() const;
};

// Builds an instance, deriving each success target from its system's Lyapunov
// contract. Propagates InfeasibleContract.
ProblemInstance make_problem_instance(std::vector<SwitchedSystem> systems,
                                      std::vector<FadingChannel> channels,
                                      CollisionMatrix collision, Vector tx_powers,
                                      double requirement_tol = 1e-9);

// Box for the auxiliary variables; keeps every logarithm finite.
struct BetaBox {
  double lower = 1e-3;
  double upper = 1.0 - 1e-3;

  double clip(double v) const;
};

// eps(t) = a / (b + t): square summable, not summable.
struct StepSchedule {
  double a = 30.0;
  double b = 20.0;
};

double stepsize(long t, const StepSchedule& schedule);

// Multipliers of the log-transformed problem. lambda(i) prices link i's log
// success constraint; nu(i, i) prices beta(i, i) <= E[alpha_i q]; nu(i, j), j != i,
// prices beta(j, i) >= E[alpha_j] q_ji.
struct DualState {
  Vector lambda;
  Matrix nu;
  Matrix beta;
  long iteration = 0;

  // lambda = 1, nu_ii = p_i + 1, nu_ij = 0.1, beta refreshed from those.
  static DualState initial(const ProblemInstance& inst, const BetaBox& box);
};

// Minimizers of the Lagrangian over the box:
// beta_ii = [lambda_i / nu_ii]_B, beta_ji = [1 - lambda_i / nu_ij]_B.
Matrix beta_update(const Vector& lambda, const Matrix& nu, const BetaBox& box);

// Lagrangian-minimizing threshold policy of every sensor at the current prices.
std::vector<AccessPolicy> primal_policies(const DualState& state,
                                          const ProblemInstance& inst);

struct Subgradient {
  Vector lambda;
  Matrix nu;
};

// Dual subgradient at state (beta must already be refreshed for this period).
Subgradient subgradient(const DualState& state, const Vector& measured_success,
                        const Vector& measured_rate, const ProblemInstance& inst);

// Projected ascent step onto the non-negative orthant; increments iteration.
DualState dual_step(const DualState& state, const Subgradient& s, double eps);

// Lagrangian with the channel expectations supplied as measured values. Throws
// std::invalid_argument when some beta entry is outside (0, 1).
double lagrangian_value(const Vector& measured_rate, const Vector& measured_success,
                        const Matrix& beta, const Vector& lambda, const Matrix& nu,
                        const ProblemInstance& inst);

struct StopRule {
  long max_periods = 5000;
  double slack_tol = 0.01;
  double dual_change_tol = 1e-3;
  long window = 100;
  double divergence_bound = 1e6;
};

struct OptimizerSettings {
  StepSchedule schedule;
  BetaBox box;
  StopRule stop;
  ExpectationMode mode = Quadrature{};
};

struct IterationRecord {
  long t = 0;
  double eps = 0.0;
  Vector lambda;
  Matrix nu;
  Matrix beta;
  Vector thresholds;
  Vector rate;       // E[alpha_i]
  Vector success;    // E[alpha_i q]
  Vector link;       // P(gamma_i = 1)
  Vector violation;  // c_i - P(gamma_i = 1)
  double objective = 0.0;   // sum_i E[alpha_i] p_i
  double dual_value = 0.0;  // Lagrangian at its minimizers
};

// Append-only record of every period.
class IterationTrace {
 public:
  void append(IterationRecord record) { records_.push_back(std::move(record)); }
  const std::vector<IterationRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const IterationRecord& back() const { return records_.back(); }

 private:
  std::vector<IterationRecord> records_;
};

struct OptimizationResult {
  std::vector<AccessPolicy> policies;
  DualState final_state;
  IterationTrace trace;
  bool converged = false;
};

// Largest absolute change of any dual coordinate between two states.
double dual_change(const DualState& a, const DualState& b);

// Runs the distributed dual subgradient iteration: each period prices are
// broadcast, sensors act on their threshold policies, the access point
// measures rates, refreshes beta and takes a projected dual step. Stops once
// max_i(c_i - P(gamma_i = 1)) <= slack_tol and the duals moved at most
// dual_change_tol over the last window periods, or after max_periods.
// Throws InfeasibleInstance when a dual exceeds the divergence bound or the
// dual value exceeds sum_i p_i, which no feasible design can cost.
OptimizationResult optimize_access_policies(const ProblemInstance& inst,
                                            const OptimizerSettings& settings);

}  // namespace randaccess
