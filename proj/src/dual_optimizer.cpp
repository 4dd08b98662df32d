#include "randaccess/dual_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "randaccess/errors.hpp"
#include "randaccess/policy.hpp"

namespace randaccess {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void ProblemInstance::validate() const {
  const int m = size();
  if (m < 1) throw std::invalid_argument("problem instance needs at least one loop");
  if (static_cast<int>(channels.size()) != m) throw std::invalid_argument("need one channel per loop");
  if (collision.size() != m) throw std::invalid_argument("collision matrix must be m x m");
  if (tx_powers.size() != m) throw std::invalid_argument("need one transmit power per loop");
  if (success_targets.size() != m) throw std::invalid_argument("need one success target per loop");
  for (int i = 0; i < m; ++i) {
    if (!(tx_powers(i) > 0.0 && std::isfinite(tx_powers(i))))
      throw std::invalid_argument("transmit powers must be positive");
    if (!(success_targets(i) > 0.0 && success_targets(i) < 1.0)) {
      std::ostringstream os;
      os << "success target of loop " << i << " is " << success_targets(i)
         << "; targets must lie strictly inside (0, 1)";
      throw std::invalid_argument(os.str());
    }
  }
}

ProblemInstance make_problem_instance(std::vector<SwitchedSystem> systems,
                                      std::vector<FadingChannel> channels,
                                      CollisionMatrix collision, Vector tx_powers,
                                      double requirement_tol) {
  Vector targets(static_cast<Eigen::Index>(systems.size()));
  for (std::size_t i = 0; i < systems.size(); ++i)
    targets(static_cast<Eigen::Index>(i)) = compute_success_requirement(systems[i], requirement_tol);
  ProblemInstance inst{std::move(systems), std::move(channels), std::move(collision),
                       std::move(tx_powers), std::move(targets)};
  inst.validate();
  return inst;
}

double BetaBox::clip(double v) const {
  if (std::isnan(v)) throw std::invalid_argument("BetaBox::clip: NaN");
  return std::clamp(v, lower, upper);
}

double stepsize(long t, const StepSchedule& schedule) {
  if (!(schedule.a > 0.0 && schedule.b > 0.0)) throw std::invalid_argument("step schedule needs a, b > 0");
  if (t < 0) throw std::invalid_argument("stepsize: negative period");
  return schedule.a / (schedule.b + static_cast<double>(t));
}

DualState DualState::initial(const ProblemInstance& inst, const BetaBox& box) {
  const int m = inst.size();
  DualState s;
  s.lambda = Vector::Ones(m);
  s.nu = Matrix::Constant(m, m, 0.1);
  for (int i = 0; i < m; ++i) s.nu(i, i) = inst.tx_powers(i) + 1.0;
  s.beta = beta_update(s.lambda, s.nu, box);
  return s;
}

Matrix beta_update(const Vector& lambda, const Matrix& nu, const BetaBox& box) {
  const Eigen::Index m = lambda.size();
  if (nu.rows() != m || nu.cols() != m) throw std::invalid_argument("beta_update: nu must be m x m");
  Matrix beta(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    // lambda / 0 is +inf (or NaN for 0 / 0, which we also send to the upper end).
    const double diag = nu(i, i) > 0.0 ? lambda(i) / nu(i, i) : kInf;
    beta(i, i) = box.clip(diag);
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == i) continue;
      const double off = nu(i, j) > 0.0 ? 1.0 - lambda(i) / nu(i, j) : -kInf;
      beta(j, i) = box.clip(off);
    }
  }
  return beta;
}

std::vector<AccessPolicy> primal_policies(const DualState& state, const ProblemInstance& inst) {
  const int m = inst.size();
  std::vector<AccessPolicy> out;
  out.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    double interference = 0.0;
    for (int j = 0; j < m; ++j)
      if (j != i) interference += state.nu(j, i) * inst.collision.destroys(i, j);
    const PricingVector prices{state.nu(i, i), interference, inst.tx_powers(i)};
    out.push_back(threshold_from_prices(prices, inst.channels[static_cast<std::size_t>(i)]));
  }
  return out;
}

Subgradient subgradient(const DualState& state, const Vector& measured_success,
                        const Vector& measured_rate, const ProblemInstance& inst) {
  const int m = inst.size();
  Subgradient s{Vector(m), Matrix(m, m)};
  for (int i = 0; i < m; ++i) {
    s.nu(i, i) = state.beta(i, i) - measured_success(i);
    double log_slack = std::log(inst.success_targets(i)) - std::log(state.beta(i, i));
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      s.nu(i, j) = measured_rate(j) * inst.collision.destroys(j, i) - state.beta(j, i);
      log_slack -= std::log1p(-state.beta(j, i));
    }
    s.lambda(i) = log_slack;
  }
  return s;
}

DualState dual_step(const DualState& state, const Subgradient& s, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("dual_step: stepsize must be positive");
  if (!s.lambda.allFinite() || !s.nu.allFinite()) throw std::invalid_argument("dual_step: non-finite subgradient");
  DualState next = state;
  next.lambda = (state.lambda + eps * s.lambda).cwiseMax(0.0);
  next.nu = (state.nu + eps * s.nu).cwiseMax(0.0);
  next.iteration = state.iteration + 1;
  return next;
}

double lagrangian_value(const Vector& measured_rate, const Vector& measured_success,
                        const Matrix& beta, const Vector& lambda, const Matrix& nu,
                        const ProblemInstance& inst) {
  const int m = inst.size();
  if (measured_rate.size() != m || measured_success.size() != m || lambda.size() != m ||
      beta.rows() != m || beta.cols() != m || nu.rows() != m || nu.cols() != m)
    throw std::invalid_argument("lagrangian_value: dimension mismatch");
  if ((beta.array() <= 0.0).any() || (beta.array() >= 1.0).any())
    throw std::invalid_argument("lagrangian_value: beta entries must lie in (0, 1)");
  double value = 0.0;
  for (int i = 0; i < m; ++i) {
    value += measured_rate(i) * inst.tx_powers(i);
    double log_term = std::log(inst.success_targets(i)) - std::log(beta(i, i));
    for (int j = 0; j < m; ++j)
      if (j != i) log_term -= std::log1p(-beta(j, i));
    value += lambda(i) * log_term;
    value += nu(i, i) * (beta(i, i) - measured_success(i));
    for (int j = 0; j < m; ++j)
      if (j != i) value += nu(i, j) * (measured_rate(j) * inst.collision.destroys(j, i) - beta(j, i));
  }
  return value;
}

double dual_change(const DualState& a, const DualState& b) {
  return std::max((a.lambda - b.lambda).cwiseAbs().maxCoeff(), (a.nu - b.nu).cwiseAbs().maxCoeff());
}

namespace {

ExpectationMode period_mode(const ExpectationMode& mode, long t, int i, int m) {
  return std::visit(overloaded{
                        [](const Quadrature& q) -> ExpectationMode { return q; },
                        [&](const MonteCarlo& mc) -> ExpectationMode {
                          const auto index = static_cast<std::uint64_t>(t) * static_cast<std::uint64_t>(m) +
                                             static_cast<std::uint64_t>(i);
                          return MonteCarlo{mc.samples, derive_seed(mc.seed, index)};
                        },
                    },
                    mode);
}

double largest_dual(const DualState& s) {
  return std::max(s.lambda.maxCoeff(), s.nu.maxCoeff());
}

}  // namespace

OptimizationResult optimize_access_policies(const ProblemInstance& inst,
                                            const OptimizerSettings& settings) {
  inst.validate();
  const StopRule& stop = settings.stop;
  if (stop.window < 1) throw std::invalid_argument("stop window must be at least 1");
  if (!(settings.box.lower > 0.0 && settings.box.upper < 1.0 && settings.box.lower < settings.box.upper))
    throw std::invalid_argument("beta box must satisfy 0 < lower < upper < 1");
  const int m = inst.size();
  const bool sampled = std::holds_alternative<MonteCarlo>(settings.mode);
  // No design can cost more than every sensor always transmitting, so a dual
  // value above this proves the constraints cannot all be met.
  const double cost_ceiling = inst.tx_powers.sum() * (sampled ? 1.1 : 1.0) + 1e-9;

  OptimizationResult result;
  DualState state = DualState::initial(inst, settings.box);
  result.policies = primal_policies(state, inst);
  result.final_state = state;

  for (long t = 0; t < stop.max_periods; ++t) {
    if (largest_dual(state) > stop.divergence_bound) {
      std::ostringstream os;
      os << "dual variables exceeded " << stop.divergence_bound << " at period " << t
         << "; the success targets are likely not jointly achievable";
      throw InfeasibleInstance(os.str());
    }
    state.beta = beta_update(state.lambda, state.nu, settings.box);
    std::vector<AccessPolicy> policies = primal_policies(state, inst);

    std::vector<PolicyMoments> moments;
    moments.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
      moments.push_back(policy_moments(policies[static_cast<std::size_t>(i)],
                                       inst.channels[static_cast<std::size_t>(i)],
                                       period_mode(settings.mode, t, i, m)));

    IterationRecord rec;
    rec.t = t;
    rec.eps = stepsize(t, settings.schedule);
    rec.lambda = state.lambda;
    rec.nu = state.nu;
    rec.beta = state.beta;
    rec.thresholds = Vector(m);
    rec.rate = Vector(m);
    rec.success = Vector(m);
    rec.link = Vector(m);
    for (int i = 0; i < m; ++i) {
      const AccessPolicy& p = policies[static_cast<std::size_t>(i)];
      rec.thresholds(i) = p.threshold_value();
      rec.rate(i) = moments[static_cast<std::size_t>(i)].rate;
      rec.success(i) = moments[static_cast<std::size_t>(i)].success;
      rec.link(i) = link_success_from_moments(moments, inst.collision, i);
    }
    rec.violation = inst.success_targets - rec.link;
    rec.objective = rec.rate.dot(inst.tx_powers);
    rec.dual_value = lagrangian_value(rec.rate, rec.success, state.beta, state.lambda, state.nu, inst);

    if (rec.dual_value > cost_ceiling) {
      std::ostringstream os;
      os << "dual value " << rec.dual_value << " exceeds the largest possible power cost "
         << inst.tx_powers.sum() << " at period " << t
         << "; the success targets are not jointly achievable";
      throw InfeasibleInstance(os.str());
    }

    bool done = false;
    if (t >= stop.window) {
      const IterationRecord& past = result.trace.records()[static_cast<std::size_t>(t - stop.window)];
      const double change = std::max((state.lambda - past.lambda).cwiseAbs().maxCoeff(),
                                     (state.nu - past.nu).cwiseAbs().maxCoeff());
      done = rec.violation.maxCoeff() <= stop.slack_tol && change <= stop.dual_change_tol;
    }

    const Subgradient s = subgradient(state, rec.success, rec.rate, inst);
    const double eps = rec.eps;
    result.trace.append(std::move(rec));
    result.policies = std::move(policies);
    result.final_state = state;
    if (done) {
      result.converged = true;
      break;
    }
    state = dual_step(state, s, eps);
  }
  return result;
}

}  // namespace randaccess
