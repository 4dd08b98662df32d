#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "randaccess/dual_optimizer.hpp"
#include "randaccess/errors.hpp"

using namespace randaccess;

namespace {

struct Moments {
  Vector rate;
  Vector success;
};

Moments quad_moments(const std::vector<AccessPolicy>& policies, const ProblemInstance& inst) {
  const int m = inst.size();
  Moments out{Vector(m), Vector(m)};
  for (int i = 0; i < m; ++i) {
    const PolicyMoments pm = policy_moments(policies[i], inst.channels[i], Quadrature{});
    out.rate(i) = pm.rate;
    out.success(i) = pm.success;
  }
  return out;
}

// Lagrangian written out term by term.
double reference_lagrangian(const Moments& mo, const Matrix& beta, const Vector& lambda, const Matrix& nu,
                            const ProblemInstance& inst) {
  const int m = inst.size();
  double v = mo.rate.dot(inst.tx_powers);
  for (int i = 0; i < m; ++i) {
    double g = std::log(inst.success_targets(i)) - std::log(beta(i, i));
    for (int j = 0; j < m; ++j)
      if (j != i) g -= std::log(1.0 - beta(j, i));
    v += lambda(i) * g + nu(i, i) * (beta(i, i) - mo.success(i));
    for (int j = 0; j < m; ++j)
      if (j != i) v += nu(i, j) * (mo.rate(j) * inst.collision.destroys(j, i) - beta(j, i));
  }
  return v;
}

DualState state_at(const Vector& lambda, const Matrix& nu, const BetaBox& box) {
  DualState s;
  s.lambda = lambda;
  s.nu = nu;
  s.beta = beta_update(lambda, nu, box);
  return s;
}

double dual_function(const DualState& s, const ProblemInstance& inst) {
  const Moments mo = quad_moments(primal_policies(s, inst), inst);
  return reference_lagrangian(mo, s.beta, s.lambda, s.nu, inst);
}

DualState random_state(std::mt19937_64& gen, int m, const BetaBox& box) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector lambda(m);
  Matrix nu(m, m);
  for (int i = 0; i < m; ++i) lambda(i) = 4 * u(gen);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) nu(i, j) = (i == j ? 1.0 + 6 * u(gen) : 4 * u(gen));
  return state_at(lambda, nu, box);
}

// Exponential(1) fading with q(h) = 1 - exp(-1.5 h).
double exp_rate(double h) { return std::exp(-h); }
double exp_success(double h) { return std::exp(-h) - std::exp(-2.5 * h) / 2.5; }

// Minimum total rate over threshold pairs on a fine grid, both links feasible.
double brute_force_optimum(double c1, double c2, double q) {
  double best = 1e9;
  for (int k = 0; k <= 30000; ++k) {
    const double h1 = 1e-4 * k;
    // Largest h2 that still serves link 2; link 1 only improves as h2 grows.
    const double need = c2 / (1 - q * exp_rate(h1));
    if (need >= 0.6) continue;
    double lo = 0, hi = 50;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (exp_success(mid) >= need ? lo : hi) = mid;
    }
    const double h2 = lo;
    if (exp_success(h1) * (1 - q * exp_rate(h2)) < c1) continue;
    best = std::min(best, exp_rate(h1) + exp_rate(h2));
  }
  return best;
}

}  // namespace

TEST(Stepsize, ScheduleAndValidation) {
  EXPECT_DOUBLE_EQ(stepsize(0, {30, 20}), 1.5);
  EXPECT_DOUBLE_EQ(stepsize(10, {1, 10}), 0.05);
  EXPECT_THROW(stepsize(-1, {}), std::invalid_argument);
  EXPECT_THROW(stepsize(0, {0, 10}), std::invalid_argument);
}

TEST(BetaBox, Clip) {
  const BetaBox box;
  EXPECT_EQ(box.clip(0.5), 0.5);
  EXPECT_EQ(box.clip(-3), box.lower);
  EXPECT_EQ(box.clip(7), box.upper);
  EXPECT_THROW(box.clip(std::nan("")), std::invalid_argument);
}

TEST(BetaUpdate, ClosedFormAndZeroPrices) {
  const BetaBox box;
  Vector lambda(2);
  lambda << 1.0, 0.5;
  Matrix nu(2, 2);
  nu << 4.0, 2.0, 0.0, 0.25;
  const Matrix beta = beta_update(lambda, nu, box);
  EXPECT_DOUBLE_EQ(beta(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(beta(1, 0), 0.5);        // 1 - lambda_0 / nu_01
  EXPECT_DOUBLE_EQ(beta(0, 1), box.lower);  // nu_10 = 0
  EXPECT_DOUBLE_EQ(beta(1, 1), box.upper);  // 0.5 / 0.25 clipped
}

TEST(BetaUpdate, BeatsGridSearchOfLagrangian) {
  const ProblemInstance inst = fixtures::two_loop_instance();
  const BetaBox box;
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 50; ++trial) {
    const DualState s = random_state(gen, 2, box);
    const Moments mo = quad_moments(primal_policies(s, inst), inst);
    const double at_min = reference_lagrangian(mo, s.beta, s.lambda, s.nu, inst);
    EXPECT_NEAR(lagrangian_value(mo.rate, mo.success, s.beta, s.lambda, s.nu, inst), at_min, 1e-12);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        for (int k = 0; k <= 1000; ++k) {
          Matrix b = s.beta;
          b(r, c) = box.lower + (box.upper - box.lower) * k / 1000.0;
          EXPECT_GE(reference_lagrangian(mo, b, s.lambda, s.nu, inst), at_min - 1e-8);
        }
      }
    }
  }
}

TEST(PrimalPolicies, BeatPerturbedPolicies) {
  const ProblemInstance inst = fixtures::two_loop_instance();
  const BetaBox box;
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const DualState s = random_state(gen, 2, box);
    const std::vector<AccessPolicy> best = primal_policies(s, inst);
    const double at_min = reference_lagrangian(quad_moments(best, inst), s.beta, s.lambda, s.nu, inst);
    for (int k = 0; k < 10; ++k) {
      std::vector<AccessPolicy> alt = best;
      const int i = k % 2;
      if (k % 3 == 0) alt[i] = AccessPolicy::constant(u(gen));
      else if (best[i].never_transmits()) alt[i] = AccessPolicy::threshold(3 * u(gen));
      else alt[i] = AccessPolicy::threshold(std::max(0.0, best[i].threshold_value() + u(gen) - 0.5));
      if (reference_lagrangian(quad_moments(alt, inst), s.beta, s.lambda, s.nu, inst) < at_min - 1e-12) ++violations;
    }
  }
  EXPECT_EQ(violations, 0);
}

TEST(Subgradient, SupportsConcaveDualFunction) {
  const ProblemInstance inst = fixtures::two_loop_instance();
  const BetaBox box;
  std::mt19937_64 gen(33);
  for (int trial = 0; trial < 100; ++trial) {
    const DualState a = random_state(gen, 2, box);
    const DualState b = random_state(gen, 2, box);
    const Moments mo = quad_moments(primal_policies(a, inst), inst);
    const Subgradient s = subgradient(a, mo.success, mo.rate, inst);
    const double linear = dual_function(a, inst) + s.lambda.dot(b.lambda - a.lambda) +
                          (s.nu.array() * (b.nu - a.nu).array()).sum();
    EXPECT_LE(dual_function(b, inst), linear + 1e-9);
  }
}

TEST(Subgradient, ExplicitEntries) {
  const ProblemInstance inst = fixtures::two_loop_instance();
  const DualState s = DualState::initial(inst, BetaBox{});
  Vector rate(2), success(2);
  rate << 0.6, 0.4;
  success << 0.45, 0.3;
  const Subgradient g = subgradient(s, success, rate, inst);
  EXPECT_DOUBLE_EQ(g.nu(0, 0), s.beta(0, 0) - 0.45);
  EXPECT_DOUBLE_EQ(g.nu(0, 1), 0.4 * 0.5 - s.beta(1, 0));
  EXPECT_DOUBLE_EQ(g.nu(1, 0), 0.6 * 0.5 - s.beta(0, 1));
  EXPECT_NEAR(g.lambda(0),
              std::log(inst.success_targets(0)) - std::log(s.beta(0, 0)) - std::log(1 - s.beta(1, 0)), 1e-15);
}

TEST(DualStep, ProjectsOntoOrthant) {
  const ProblemInstance inst = fixtures::two_loop_instance();
  const DualState s = DualState::initial(inst, BetaBox{});
  Subgradient g{Vector::Constant(2, -100.0), Matrix::Constant(2, 2, 1.0)};
  const DualState n = dual_step(s, g, 0.5);
  EXPECT_EQ(n.lambda.minCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(n.nu(0, 1), s.nu(0, 1) + 0.5);
  EXPECT_EQ(n.iteration, s.iteration + 1);
  EXPECT_THROW(dual_step(s, g, 0.0), std::invalid_argument);
}

TEST(Optimizer, ConvergesOnTwoLoopInstance) {
  const ProblemInstance inst = fixtures::two_loop_instance();
  const OptimizationResult r = optimize_access_policies(inst, OptimizerSettings{});
  ASSERT_TRUE(r.converged);
  const IterationRecord& last = r.trace.back();
  EXPECT_LE(last.violation.maxCoeff(), 0.01);
  EXPECT_LT(r.policies[0].threshold_value(), r.policies[1].threshold_value());
  const double optimum = brute_force_optimum(inst.success_targets(0), inst.success_targets(1), 0.5);
  EXPECT_NEAR(last.objective, optimum, 0.01);
  // Weak duality.
  for (const IterationRecord& rec : r.trace.records()) EXPECT_LE(rec.dual_value, optimum + 1e-6);
  const IterationRecord& back = r.trace.records()[r.trace.size() - 1 - 100];
  EXPECT_LE(std::max((last.lambda - back.lambda).cwiseAbs().maxCoeff(), (last.nu - back.nu).cwiseAbs().maxCoeff()),
            1e-3);
}

TEST(Optimizer, SingleLinkMatchesDirectInversion) {
  const ProblemInstance inst = make_problem_instance({fixtures::scalar_system(0.5, 1.1)}, {FadingChannel{}},
                                                     CollisionMatrix::none(1), Vector::Ones(1));
  const OptimizationResult r = optimize_access_policies(inst, OptimizerSettings{});
  ASSERT_TRUE(r.converged);
  // The cheapest feasible threshold puts E[alpha q] exactly at c.
  double lo = 0, hi = 10;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (exp_success(mid) >= inst.success_targets(0) ? lo : hi) = mid;
  }
  EXPECT_NEAR(r.policies[0].threshold_value(), lo, 0.05);
  EXPECT_LE(r.trace.back().violation(0), 0.01);
}

TEST(Optimizer, ZeroPeriodsReportsNoConvergence) {
  OptimizerSettings s;
  s.stop.max_periods = 0;
  const OptimizationResult r = optimize_access_policies(fixtures::two_loop_instance(), s);
  EXPECT_FALSE(r.converged);
  EXPECT_TRUE(r.trace.empty());
  EXPECT_EQ(r.policies.size(), 2u);
}

TEST(Optimizer, InfeasibleTargetsAbort) {
  Matrix q(2, 2);
  q << 0, 1, 1, 0;
  const ProblemInstance inst = make_problem_instance(
      {fixtures::scalar_system(0.5, 10.0), fixtures::scalar_system(0.5, 10.0)}, {FadingChannel{}, FadingChannel{}},
      CollisionMatrix(q), Vector::Ones(2));
  EXPECT_THROW(optimize_access_policies(inst, OptimizerSettings{}), InfeasibleInstance);
}

TEST(Optimizer, DivergenceBoundTrips) {
  OptimizerSettings s;
  s.stop.divergence_bound = 1.5;
  EXPECT_THROW(optimize_access_policies(fixtures::two_loop_instance(), s), InfeasibleInstance);
}

TEST(Optimizer, DeterministicInBothModes) {
  const ProblemInstance inst = fixtures::two_loop_instance();
  OptimizerSettings s;
  s.stop.max_periods = 300;
  s.mode = MonteCarlo{2000, 3};
  const OptimizationResult a = optimize_access_policies(inst, s);
  const OptimizationResult b = optimize_access_policies(inst, s);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    EXPECT_EQ(a.trace.records()[k].lambda, b.trace.records()[k].lambda);
    EXPECT_EQ(a.trace.records()[k].nu, b.trace.records()[k].nu);
  }
  EXPECT_EQ(a.policies, b.policies);
}

TEST(Optimizer, MonteCarloModeMeetsSlackForTwoSeeds) {
  const ProblemInstance inst = fixtures::two_loop_instance();
  for (std::uint64_t seed : {11u, 12u}) {
    OptimizerSettings s;
    s.mode = MonteCarlo{10000, seed};
    const OptimizationResult r = optimize_access_policies(inst, s);
    EXPECT_TRUE(r.converged) << seed;
    EXPECT_LE(r.trace.back().violation.maxCoeff(), 0.01) << seed;
    // Judged by exact expectations as well, with the sampling noise allowance.
    Vector exact(2);
    for (int i = 0; i < 2; ++i)
      exact(i) = link_success_probability(r.policies, inst.channels, inst.collision, i, Quadrature{});
    EXPECT_LE((inst.success_targets - exact).maxCoeff(), 0.01 + 4 * std::sqrt(0.25 / 10000)) << seed;
  }
}
