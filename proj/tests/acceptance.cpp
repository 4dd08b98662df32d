// Acceptance checks for the reference experiment and randomized instances.
// Prints one PASS/FAIL line per criterion; exits nonzero if any fails.

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "randaccess/commands.hpp"
#include "randaccess/config.hpp"
#include "randaccess/control.hpp"
#include "randaccess/dual_optimizer.hpp"
#include "randaccess/simulator.hpp"

using namespace randaccess;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double budget_s, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > budget_s) {
    o.pass = false;
    o.detail += " [over time budget " + std::to_string(budget_s) + " s]";
  }
  if (!o.pass) ++failures;
  std::printf("%s %d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

SwitchedSystem scalar(double a_closed, double a_open) {
  return SwitchedSystem(Matrix::Constant(1, 1, a_closed), Matrix::Constant(1, 1, a_open), Matrix::Identity(1, 1),
                        Matrix::Identity(1, 1), 0.8);
}

ProblemInstance reference_instance() { return build_instance(parse_config(REFERENCE_CONFIG)); }

Matrix gaussian_matrix(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Matrix m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = nd(gen);
  return m;
}

// Random P > 0, A_c contracting in the P-norm, A_o expanding.
SwitchedSystem random_system(int n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Matrix b = gaussian_matrix(n, gen);
  const Matrix p = b * b.transpose() + 0.5 * Matrix::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Matrix> es(p);
  const double rho = 0.3 + 0.65 * u(gen);
  Matrix s = gaussian_matrix(n, gen);
  s *= std::sqrt((0.2 + 0.7 * u(gen)) * rho) / s.operatorNorm();
  const Matrix a_closed = es.operatorInverseSqrt() * s * es.operatorSqrt();
  Matrix a_open = gaussian_matrix(n, gen);
  a_open *= (1.05 + u(gen)) / a_open.eigenvalues().cwiseAbs().maxCoeff();
  return SwitchedSystem(a_closed, a_open, Matrix::Identity(n, n), p, rho);
}

struct Moments {
  Vector rate;
  Vector success;
};

Moments moments_of(const std::vector<AccessPolicy>& policies, const ProblemInstance& inst) {
  Moments mo{Vector(inst.size()), Vector(inst.size())};
  for (int i = 0; i < inst.size(); ++i) {
    const PolicyMoments pm = policy_moments(policies[i], inst.channels[i], Quadrature{});
    mo.rate(i) = pm.rate;
    mo.success(i) = pm.success;
  }
  return mo;
}

Outcome criterion1() {
  const double c1 = compute_success_requirement(scalar(0.5, 1.1));
  const double c2 = compute_success_requirement(scalar(0.4, 1.0));
  const double o1 = (1.21 - 0.8) / (1.21 - 0.25);
  const double o2 = (1.0 - 0.8) / (1.0 - 0.16);
  const double err = std::max(std::abs(c1 - o1), std::abs(c2 - o2));
  return {err <= 1e-6, "c1 = " + fmt(c1) + ", c2 = " + fmt(c2) + ", max |c - oracle| = " + fmt(err)};
}

Outcome criterion2() {
  std::mt19937_64 gen(20240601);
  int bad = 0;
  double worst_at_c = -1e300, least_below = 1e300;
  for (int k = 0; k < 100; ++k) {
    const SwitchedSystem sys = random_system(2 + k % 3, gen);
    const double c = compute_success_requirement(sys);
    const double at = lmi_slack(c, sys);
    const double below = c >= 1e-6 ? lmi_slack(c - 1e-6, sys) : 1.0;
    worst_at_c = std::max(worst_at_c, at);
    least_below = std::min(least_below, below);
    if (!(at <= 1e-8 && below > 0.0)) ++bad;
  }
  return {bad == 0, std::to_string(bad) + "/100 uncertified, max slack(c) = " + fmt(worst_at_c) +
                        ", min slack(c - 1e-6) = " + fmt(least_below)};
}

Outcome criterion3() {
  const ProblemInstance inst = reference_instance();
  const BetaBox box;
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_gap = 0.0;
  int policy_violations = 0;
  int perturbations = 0;
  for (int trial = 0; trial < 20; ++trial) {
    DualState s;
    s.lambda = Vector(2);
    s.nu = Matrix(2, 2);
    for (int i = 0; i < 2; ++i) s.lambda(i) = 4 * u(gen);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) s.nu(i, j) = i == j ? 1 + 6 * u(gen) : 4 * u(gen);
    s.beta = beta_update(s.lambda, s.nu, box);
    const std::vector<AccessPolicy> best = primal_policies(s, inst);
    const Moments mo = moments_of(best, inst);
    const double at_min = lagrangian_value(mo.rate, mo.success, s.beta, s.lambda, s.nu, inst);

    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        for (int k = 0; k <= 2000; ++k) {
          Matrix b = s.beta;
          b(r, c) = box.lower + (box.upper - box.lower) * k / 2000.0;
          worst_gap = std::max(worst_gap, at_min - lagrangian_value(mo.rate, mo.success, b, s.lambda, s.nu, inst));
        }

    for (int k = 0; k < 10; ++k) {
      std::vector<AccessPolicy> alt = best;
      const int i = k % 2;
      if (k % 3 == 0) alt[i] = AccessPolicy::constant(u(gen));
      else if (best[i].never_transmits()) alt[i] = AccessPolicy::threshold(3 * u(gen));
      else alt[i] = AccessPolicy::threshold(std::max(0.0, best[i].threshold_value() + u(gen) - 0.5));
      const Moments am = moments_of(alt, inst);
      ++perturbations;
      if (lagrangian_value(am.rate, am.success, s.beta, s.lambda, s.nu, inst) < at_min - 1e-12) ++policy_violations;
    }
  }
  return {worst_gap <= 1e-8 && policy_violations == 0 && perturbations == 200,
          "beta grid gap " + fmt(worst_gap) + ", policy violations " + std::to_string(policy_violations) + "/" +
              std::to_string(perturbations)};
}

Outcome criterion4() {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Matrix one = Matrix::Identity(1, 1);
  const SwitchedSystem sys(0.3 * one, 0.9 * one, one, one, 0.8);
  double worst_z = 0.0;
  int links = 0;
  int outside = 0;
  for (int k = 0; k < 20; ++k) {
    const int m = 2 + k % 3;
    SimConfig cfg;
    Matrix q(m, m);
    for (int i = 0; i < m; ++i) {
      cfg.instance.systems.push_back(sys);
      cfg.instance.channels.push_back(
          k % 2 ? FadingChannel(ExponentialFading{0.5 + 1.5 * u(gen)}, SaturatingCurve{0.5 + 2 * u(gen), 1.0})
                : FadingChannel(UniformFading{0.2 * u(gen), 1 + 2 * u(gen)}, LogisticDbCurve{0.5 + u(gen), -2, 1}));
      cfg.policies.push_back(u(gen) < 0.25 ? AccessPolicy::constant(u(gen)) : AccessPolicy::threshold(1.5 * u(gen)));
      for (int j = 0; j < m; ++j) q(i, j) = u(gen);
    }
    cfg.instance.collision = CollisionMatrix(q);
    cfg.instance.tx_powers = Vector::Ones(m);
    cfg.instance.success_targets = Vector::Constant(m, 0.5);
    cfg.seed = 1000 + k;
    for (const GammaRateCheck& c : empirical_gamma_rate_check(cfg, 100000)) {
      ++links;
      worst_z = std::max(worst_z, std::abs(c.z_score));
      if (std::abs(c.z_score) > 4.0) ++outside;
    }
  }
  return {outside == 0, std::to_string(outside) + "/" + std::to_string(links) + " links outside 4 sigma, max |z| = " +
                            fmt(worst_z)};
}

struct Reference {
  ProblemInstance inst;
  OptimizationResult result;
};

const Reference& reference_run() {
  static const Reference ref = [] {
    Reference r{reference_instance(), {}};
    r.result = optimize_access_policies(r.inst, parse_config(REFERENCE_CONFIG).optimizer);
    return r;
  }();
  return ref;
}

Outcome criterion5() {
  const Reference& ref = reference_run();
  const auto& recs = ref.result.trace.records();
  if (recs.empty()) return {false, "no iterations"};
  const IterationRecord& last = recs.back();
  const double violation = last.violation.maxCoeff();
  double change = 1e300;
  if (recs.size() > 100) {
    const IterationRecord& past = recs[recs.size() - 1 - 100];
    change = std::max((last.lambda - past.lambda).cwiseAbs().maxCoeff(), (last.nu - past.nu).cwiseAbs().maxCoeff());
  }
  const double h1 = ref.result.policies[0].threshold_value();
  const double h2 = ref.result.policies[1].threshold_value();
  const bool ok = ref.result.converged && recs.size() <= 5000 && violation <= 0.01 && change <= 1e-3 && h1 < h2;
  return {ok, std::to_string(recs.size()) + " periods, max violation " + fmt(violation) + ", windowed dual change " +
                  fmt(change) + ", thresholds " + fmt(h1) + " < " + fmt(h2)};
}

Outcome criterion6() {
  const Reference& ref = reference_run();
  SimConfig cfg;
  cfg.instance = ref.inst;
  cfg.policies = ref.result.policies;
  cfg.horizon = 200000;
  cfg.burn_in = 20000;
  const SimMetrics m = run_simulation(cfg);
  const double j1 = m.empirical_cost(0), j2 = m.empirical_cost(1);
  const bool near5 = std::abs(j1 - 5.0) <= 0.5 && std::abs(j2 - 5.0) <= 0.5;
  const bool agree = std::abs(j1 - j2) <= 0.1 * std::max(j1, j2);
  const bool rates = m.empirical_tx_rate(0) > ref.inst.success_targets(0) &&
                     m.empirical_tx_rate(1) > ref.inst.success_targets(1);
  return {near5 && agree && rates, "costs " + fmt(j1) + ", " + fmt(j2) + "; tx rates " + fmt(m.empirical_tx_rate(0)) +
                                       ", " + fmt(m.empirical_tx_rate(1)) + " vs c " +
                                       fmt(ref.inst.success_targets(0)) + ", " + fmt(ref.inst.success_targets(1))};
}

Outcome criterion7() {
  const Reference& ref = reference_run();
  SimConfig cfg;
  cfg.instance = ref.inst;
  cfg.policies = ref.result.policies;
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd(0.0, 3.0);
  int bad = 0;
  double worst_z = -1e300;
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 10; ++k) {
      cfg.seed = 500 + 10 * i + k;
      const DriftCheck d = lyapunov_drift_check(cfg, i, Vector::Constant(1, nd(gen)), 100000);
      worst_z = std::max(worst_z, d.z_score);
      if (!d.within_bound) ++bad;
    }
  }
  return {bad == 0, std::to_string(bad) + "/20 probes above bound + 4 SE, max z = " + fmt(worst_z)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome criterion8() {
  const fs::path base(SCRATCH_DIR);
  std::vector<fs::path> dirs{base / "run_a", base / "run_b"};
  for (const fs::path& d : dirs) {
    fs::remove_all(d);
    CommandRequest req;
    req.command = "pipeline";
    req.config_path = REFERENCE_CONFIG;
    req.out_dir = d.string();
    req.seed = 1;
    std::ostringstream out, err;
    const int code = run_command(req, out, err);
    if (code != 0) return {false, "pipeline exited " + std::to_string(code) + ": " + err.str()};
  }
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(dirs[0])) {
    if (entry.path().extension() != ".csv") continue;
    ++compared;
    if (slurp(entry.path()) != slurp(dirs[1] / entry.path().filename()))
      return {false, entry.path().filename().string() + " differs"};
  }
  return {compared >= 3, std::to_string(compared) + " CSV files byte-identical"};
}

}  // namespace

int main() {
  report(1, "success requirement matches scalar closed form", 1.0, criterion1);
  report(2, "matrix requirement certified by LMI slack", 10.0, criterion2);
  report(3, "Lagrangian minimizers beat grid and perturbations", 60.0, criterion3);
  report(4, "analytic link success matches slot simulation", 60.0, criterion4);
  report(5, "dual iteration converges on the reference instance", 120.0, criterion5);
  report(6, "closed-loop costs near 5 with tx rates above requirement", 120.0, criterion6);
  report(7, "Lyapunov drift bound holds at random probes", 120.0, criterion7);
  report(8, "pipeline CSV outputs are reproducible", 120.0, criterion8);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
