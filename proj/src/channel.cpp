#include "randaccess/channel.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace randaccess {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Exponential tails beyond mean * kTailSpan carry mass below 1e-12.
const double kTailSpan = std::log(1e12) + 1.0;

double simpson(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(fa, flm, fm, a, m);
  const double right = simpson(fm, frm, fb, m, b);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

// Integral of f over [a, b], split into fixed panels before adapting so a
// narrow feature cannot fool the first error estimate.
double integrate(const std::function<double(double)>& f, double a, double b, double eps) {
  if (!(b > a)) return 0.0;
  constexpr int kPanels = 16;
  const double width = (b - a) / kPanels;
  double total = 0.0;
  for (int k = 0; k < kPanels; ++k) {
    const double lo = a + k * width;
    const double hi = (k + 1 == kPanels) ? b : lo + width;
    const double flo = f(lo);
    const double fmid = f(0.5 * (lo + hi));
    const double fhi = f(hi);
    total += adaptive_simpson(f, lo, hi, flo, fmid, fhi, simpson(flo, fmid, fhi, lo, hi),
                              eps / kPanels, 40);
  }
  return total;
}

// Upper end of the integration range that matters for the distribution.
double support_end(const FadingDistribution& dist) {
  return std::visit(overloaded{
                        [](const ExponentialFading& e) { return e.mean * kTailSpan; },
                        [](const UniformFading& u) { return u.high; },
                    },
                    dist);
}

double support_begin(const FadingDistribution& dist) {
  return std::visit(overloaded{
                        [](const ExponentialFading&) { return 0.0; },
                        [](const UniformFading& u) { return u.low; },
                    },
                    dist);
}

constexpr double kQuadratureEps = 1e-13;

}  // namespace

FadingChannel::FadingChannel(FadingDistribution dist, SuccessCurve curve)
    : dist_(std::move(dist)), curve_(std::move(curve)) {
  std::visit(overloaded{
                 [](const ExponentialFading& e) {
                   if (!(e.mean > 0.0 && std::isfinite(e.mean)))
                     throw std::invalid_argument("exponential fading mean must be positive");
                 },
                 [](const UniformFading& u) {
                   if (!(u.low >= 0.0 && u.high > u.low && std::isfinite(u.high)))
                     throw std::invalid_argument("uniform fading needs 0 <= low < high");
                 },
             },
             dist_);
  std::visit(overloaded{
                 [](const SaturatingCurve& c) {
                   if (!(c.kappa > 0.0 && c.gain > 0.0 && std::isfinite(c.kappa * c.gain)))
                     throw std::invalid_argument("saturating curve needs kappa > 0 and gain > 0");
                 },
                 [](const LogisticDbCurve& c) {
                   if (!(c.slope > 0.0 && c.gain > 0.0 && std::isfinite(c.midpoint_db)))
                     throw std::invalid_argument("logistic curve needs slope > 0, gain > 0");
                 },
             },
             curve_);
}

double FadingChannel::success_at_zero() const { return decode_success_prob(*this, 0.0); }

double FadingChannel::success_supremum() const { return 1.0; }

double FadingChannel::density(double h) const {
  return std::visit(overloaded{
                        [h](const ExponentialFading& e) {
                          return h < 0.0 ? 0.0 : std::exp(-h / e.mean) / e.mean;
                        },
                        [h](const UniformFading& u) {
                          return (h < u.low || h > u.high) ? 0.0 : 1.0 / (u.high - u.low);
                        },
                    },
                    dist_);
}

double FadingChannel::mean() const {
  return std::visit(overloaded{
                        [](const ExponentialFading& e) { return e.mean; },
                        [](const UniformFading& u) { return 0.5 * (u.low + u.high); },
                    },
                    dist_);
}

CollisionMatrix::CollisionMatrix(Matrix q) : q_(std::move(q)) {
  if (q_.rows() != q_.cols()) throw std::invalid_argument("collision matrix must be square");
  for (Eigen::Index j = 0; j < q_.rows(); ++j) {
    for (Eigen::Index i = 0; i < q_.cols(); ++i) {
      if (!(q_(j, i) >= 0.0 && q_(j, i) <= 1.0))
        throw std::invalid_argument("collision probabilities must lie in [0, 1]");
    }
    q_(j, j) = 0.0;
  }
}

double sample_channel(const FadingChannel& ch, RandomStream& rng) {
  return std::visit(overloaded{
                        [&rng](const ExponentialFading& e) { return rng.exponential(e.mean); },
                        [&rng](const UniformFading& u) { return u.low + (u.high - u.low) * rng.uniform(); },
                    },
                    ch.distribution());
}

double decode_success_prob(const FadingChannel& ch, double h) {
  if (!(h >= 0.0)) throw std::invalid_argument("decode_success_prob: channel state must be >= 0");
  return std::visit(overloaded{
                        [h](const SaturatingCurve& c) { return -std::expm1(-c.kappa * c.gain * h); },
                        [h](const LogisticDbCurve& c) {
                          if (h == 0.0) return 0.0;
                          const double db = 10.0 * std::log10(c.gain * h);
                          return 1.0 / (1.0 + std::exp(-c.slope * (db - c.midpoint_db)));
                        },
                    },
                    ch.curve());
}

double invert_success_curve(const FadingChannel& ch, double target) {
  if (!(target >= 0.0 && target <= 1.0))
    throw std::invalid_argument("invert_success_curve: target must lie in [0, 1]");
  if (target >= ch.success_supremum()) return kInf;
  if (target <= ch.success_at_zero()) return 0.0;
  return std::visit(overloaded{
                        [target](const SaturatingCurve& c) {
                          return -std::log1p(-target) / (c.kappa * c.gain);
                        },
                        [target](const LogisticDbCurve& c) {
                          const double db = c.midpoint_db + std::log(target / (1.0 - target)) / c.slope;
                          return std::pow(10.0, db / 10.0) / c.gain;
                        },
                    },
                    ch.curve());
}

double expected_decode_success(const FadingChannel& ch) {
  const auto f = [&ch](double h) { return ch.density(h) * decode_success_prob(ch, h); };
  return integrate(f, support_begin(ch.distribution()), support_end(ch.distribution()),
                   kQuadratureEps);
}

namespace {

PolicyMoments quadrature_moments(const AccessPolicy& policy, const FadingChannel& ch) {
  if (!policy.is_threshold()) {
    return {policy.rate(), policy.rate() * expected_decode_success(ch)};
  }
  if (policy.never_transmits()) return {0.0, 0.0};
  const double lo = std::max(policy.threshold_value(), support_begin(ch.distribution()));
  const double hi = support_end(ch.distribution());
  const auto rate_integrand = [&ch](double h) { return ch.density(h); };
  const auto success_integrand = [&ch](double h) { return ch.density(h) * decode_success_prob(ch, h); };
  return {integrate(rate_integrand, lo, hi, kQuadratureEps),
          integrate(success_integrand, lo, hi, kQuadratureEps)};
}

PolicyMoments monte_carlo_moments(const AccessPolicy& policy, const FadingChannel& ch,
                                  const MonteCarlo& mc) {
  if (mc.samples == 0) throw std::invalid_argument("monte carlo mode needs at least one sample");
  RandomStream rng(mc.seed);
  std::size_t transmissions = 0;
  std::size_t successes = 0;
  for (std::size_t k = 0; k < mc.samples; ++k) {
    const double h = sample_channel(ch, rng);
    const int tx = decide(policy, h, rng);
    const bool decoded = rng.bernoulli(decode_success_prob(ch, h));
    transmissions += static_cast<std::size_t>(tx);
    successes += static_cast<std::size_t>(tx == 1 && decoded);
  }
  const double n = static_cast<double>(mc.samples);
  return {static_cast<double>(transmissions) / n, static_cast<double>(successes) / n};
}

}  // namespace

PolicyMoments policy_moments(const AccessPolicy& policy, const FadingChannel& ch,
                             const ExpectationMode& mode) {
  return std::visit(overloaded{
                        [&](const Quadrature&) { return quadrature_moments(policy, ch); },
                        [&](const MonteCarlo& mc) { return monte_carlo_moments(policy, ch, mc); },
                    },
                    mode);
}

double expected_policy_rate(const AccessPolicy& policy, const FadingChannel& ch,
                            const ExpectationMode& mode) {
  return policy_moments(policy, ch, mode).rate;
}

double expected_policy_success(const AccessPolicy& policy, const FadingChannel& ch,
                               const ExpectationMode& mode) {
  return policy_moments(policy, ch, mode).success;
}

double link_success_from_moments(std::span<const PolicyMoments> moments,
                                 const CollisionMatrix& collision, int i) {
  const int m = static_cast<int>(moments.size());
  if (collision.size() != m) throw std::invalid_argument("collision matrix size mismatch");
  if (i < 0 || i >= m) throw std::invalid_argument("link index out of range");
  double p = moments[static_cast<std::size_t>(i)].success;
  for (int j = 0; j < m; ++j) {
    if (j != i) p *= 1.0 - moments[static_cast<std::size_t>(j)].rate * collision.destroys(j, i);
  }
  return p;
}

double link_success_probability(std::span<const AccessPolicy> policies,
                                std::span<const FadingChannel> channels,
                                const CollisionMatrix& collision, int i,
                                const ExpectationMode& mode) {
  if (policies.size() != channels.size())
    throw std::invalid_argument("one channel per policy required");
  std::vector<PolicyMoments> moments;
  moments.reserve(policies.size());
  for (std::size_t k = 0; k < policies.size(); ++k)
    moments.push_back(policy_moments(policies[k], channels[k], mode));
  return link_success_from_moments(moments, collision, i);
}

}  // namespace randaccess
