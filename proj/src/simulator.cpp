#include "randaccess/simulator.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "randaccess/errors.hpp"

namespace randaccess {

namespace {

constexpr double kDivergenceNorm = 1e12;

double z_score(double observed, double expected, double standard_error) {
  const double diff = observed - expected;
  if (standard_error > 0.0) return diff / standard_error;
  if (diff == 0.0) return 0.0;
  return std::copysign(std::numeric_limits<double>::infinity(), diff);
}

}  // namespace

void SimConfig::validate() const {
  instance.validate();
  if (policies.size() != instance.systems.size())
    throw std::invalid_argument("simulation needs one policy per system");
  if (!(horizon > burn_in && burn_in >= 0))
    throw std::invalid_argument("simulation needs horizon > burn_in >= 0");
  if (trajectory_stride < 0) throw std::invalid_argument("trajectory stride must be >= 0");
}

bool operator==(const SimMetrics& a, const SimMetrics& b) {
  if (a.slots_averaged != b.slots_averaged || a.trajectory.size() != b.trajectory.size()) return false;
  if (a.empirical_cost != b.empirical_cost || a.empirical_tx_rate != b.empirical_tx_rate ||
      a.empirical_success_rate != b.empirical_success_rate)
    return false;
  for (std::size_t k = 0; k < a.trajectory.size(); ++k) {
    const TrajectorySample& x = a.trajectory[k];
    const TrajectorySample& y = b.trajectory[k];
    if (x.slot != y.slot || x.system != y.system || x.lyapunov != y.lyapunov || x.tx != y.tx ||
        x.gamma != y.gamma)
      return false;
  }
  return true;
}

SlotSimulator::SlotSimulator(const SimConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  noise_factors_.reserve(cfg_.instance.systems.size());
  for (const SwitchedSystem& sys : cfg_.instance.systems) noise_factors_.push_back(psd_factor(sys.noise_cov()));
}

void SlotSimulator::access(RandomStream& rng, std::vector<int>& tx, std::vector<int>& gamma) const {
  const ProblemInstance& inst = cfg_.instance;
  const int m = inst.size();
  std::vector<double> h(static_cast<std::size_t>(m));
  tx.assign(static_cast<std::size_t>(m), 0);
  gamma.assign(static_cast<std::size_t>(m), 0);
  for (int i = 0; i < m; ++i) {
    const auto k = static_cast<std::size_t>(i);
    h[k] = sample_channel(inst.channels[k], rng);
    tx[k] = decide(cfg_.policies[k], h[k], rng);
  }
  for (int i = 0; i < m; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!tx[k]) continue;
    bool survived = true;
    // One independent collision event per simultaneously transmitting sensor.
    for (int j = 0; j < m; ++j) {
      if (j == i || !tx[static_cast<std::size_t>(j)]) continue;
      if (rng.bernoulli(inst.collision.destroys(j, i))) survived = false;
    }
    if (survived && rng.bernoulli(decode_success_prob(inst.channels[k], h[k]))) gamma[k] = 1;
  }
}

Vector SlotSimulator::noise(int i, RandomStream& rng) const {
  const Matrix& factor = noise_factors_[static_cast<std::size_t>(i)];
  Vector z(factor.cols());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    z(k) = cfg_.noise == NoiseFamily::kGaussian ? rng.normal()
                                                : std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
  }
  return factor * z;
}

SlotOutcome SlotSimulator::step(const std::vector<Vector>& states, RandomStream& rng) const {
  const ProblemInstance& inst = cfg_.instance;
  if (static_cast<int>(states.size()) != inst.size())
    throw std::invalid_argument("simulate_slot: one state per system required");
  SlotOutcome out;
  access(rng, out.tx, out.gamma);
  out.next_states.reserve(states.size());
  for (int i = 0; i < inst.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const SwitchedSystem& sys = inst.systems[k];
    if (states[k].size() != sys.dim()) throw std::invalid_argument("simulate_slot: state dimension mismatch");
    const Matrix& a = out.gamma[k] ? sys.a_closed() : sys.a_open();
    out.next_states.push_back(a * states[k] + noise(i, rng));
  }
  return out;
}

SlotOutcome simulate_slot(const std::vector<Vector>& states, const SimConfig& cfg, RandomStream& rng) {
  return SlotSimulator(cfg).step(states, rng);
}

SimMetrics run_simulation(const SimConfig& cfg) {
  const SlotSimulator sim(cfg);
  const ProblemInstance& inst = cfg.instance;
  const int m = inst.size();
  RandomStream rng(cfg.seed);

  std::vector<Vector> states;
  for (const SwitchedSystem& sys : inst.systems) states.push_back(Vector::Zero(sys.dim()));

  SimMetrics metrics;
  metrics.empirical_cost = Vector::Zero(m);
  metrics.empirical_tx_rate = Vector::Zero(m);
  metrics.empirical_success_rate = Vector::Zero(m);

  for (long slot = 0; slot < cfg.horizon; ++slot) {
    SlotOutcome out = sim.step(states, rng);
    states = std::move(out.next_states);
    for (int i = 0; i < m; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (!(states[k].norm() <= kDivergenceNorm)) {
        std::ostringstream os;
        os << "state of system " << i << " exceeded norm " << kDivergenceNorm << " at slot " << slot
           << "; the access policies do not stabilize it";
        throw SimulationUnstable(i, slot, os.str());
      }
    }
    const bool record = cfg.trajectory_stride > 0 && slot % cfg.trajectory_stride == 0;
    if (slot < cfg.burn_in && !record) continue;
    for (int i = 0; i < m; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double v = inst.systems[k].lyapunov(states[k]);
      if (slot >= cfg.burn_in) {
        metrics.empirical_cost(i) += v;
        metrics.empirical_tx_rate(i) += out.tx[k];
        metrics.empirical_success_rate(i) += out.gamma[k];
      }
      if (record) metrics.trajectory.push_back({slot, i, v, out.tx[k], out.gamma[k]});
    }
  }
  metrics.slots_averaged = cfg.horizon - cfg.burn_in;
  const double n = static_cast<double>(metrics.slots_averaged);
  metrics.empirical_cost /= n;
  metrics.empirical_tx_rate /= n;
  metrics.empirical_success_rate /= n;
  return metrics;
}

std::vector<GammaRateCheck> empirical_gamma_rate_check(const SimConfig& cfg, long n_slots) {
  if (n_slots <= 0) throw std::invalid_argument("empirical_gamma_rate_check: n_slots must be positive");
  const SlotSimulator sim(cfg);
  const ProblemInstance& inst = cfg.instance;
  const int m = inst.size();
  RandomStream rng(cfg.seed);

  std::vector<long> hits(static_cast<std::size_t>(m), 0);
  std::vector<int> tx;
  std::vector<int> gamma;
  for (long slot = 0; slot < n_slots; ++slot) {
    sim.access(rng, tx, gamma);
    for (int i = 0; i < m; ++i) hits[static_cast<std::size_t>(i)] += gamma[static_cast<std::size_t>(i)];
  }

  std::vector<GammaRateCheck> out;
  const double n = static_cast<double>(n_slots);
  for (int i = 0; i < m; ++i) {
    GammaRateCheck c;
    c.empirical = static_cast<double>(hits[static_cast<std::size_t>(i)]) / n;
    c.analytic = link_success_probability(cfg.policies, inst.channels, inst.collision, i, Quadrature{});
    c.z_score = z_score(c.empirical, c.analytic, std::sqrt(c.analytic * (1.0 - c.analytic) / n));
    out.push_back(c);
  }
  return out;
}

DriftCheck lyapunov_drift_check(const SimConfig& cfg, int system, const Vector& x_probe,
                                long n_replications, double feasibility_tol) {
  const SlotSimulator sim(cfg);
  const ProblemInstance& inst = cfg.instance;
  if (system < 0 || system >= inst.size()) throw std::invalid_argument("lyapunov_drift_check: bad system index");
  if (n_replications < 2) throw std::invalid_argument("lyapunov_drift_check: need at least two replications");
  const SwitchedSystem& sys = inst.systems[static_cast<std::size_t>(system)];
  if (x_probe.size() != sys.dim()) throw std::invalid_argument("lyapunov_drift_check: probe dimension mismatch");

  const double analytic =
      link_success_probability(cfg.policies, inst.channels, inst.collision, system, Quadrature{});
  const double target = inst.success_targets(system);
  if (analytic < target - feasibility_tol) {
    std::ostringstream os;
    os << "policies give P(gamma = 1) = " << analytic << " below the requirement " << target
       << " for system " << system;
    throw std::invalid_argument(os.str());
  }

  RandomStream rng(cfg.seed);
  std::vector<int> tx;
  std::vector<int> gamma;
  double mean = 0.0;
  double m2 = 0.0;
  const Vector closed = sys.a_closed() * x_probe;
  const Vector open = sys.a_open() * x_probe;
  for (long r = 0; r < n_replications; ++r) {
    sim.access(rng, tx, gamma);
    const Vector next = (gamma[static_cast<std::size_t>(system)] ? closed : open) + sim.noise(system, rng);
    const double v = sys.lyapunov(next);
    const double delta = v - mean;
    mean += delta / static_cast<double>(r + 1);
    m2 += delta * (v - mean);
  }
  DriftCheck out;
  out.sample_mean = mean;
  out.bound = sys.decay_rate() * sys.lyapunov(x_probe) + sys.noise_gain();
  out.standard_error = std::sqrt(m2 / static_cast<double>(n_replications - 1) /
                                 static_cast<double>(n_replications));
  out.z_score = z_score(out.sample_mean, out.bound, out.standard_error);
  out.within_bound = out.sample_mean <= out.bound + 4.0 * out.standard_error;
  return out;
}

}  // namespace randaccess
