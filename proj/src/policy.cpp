#include "randaccess/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace randaccess {

AccessPolicy AccessPolicy::threshold(double h_bar) {
  if (!(h_bar >= 0.0)) throw std::invalid_argument("policy threshold must be >= 0");
  return AccessPolicy(Kind::kThreshold, h_bar);
}

AccessPolicy AccessPolicy::constant(double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("constant access rate must lie in [0, 1]");
  return AccessPolicy(Kind::kConstant, rate);
}

bool AccessPolicy::never_transmits() const {
  return is_threshold() ? std::isinf(value_) : value_ == 0.0;
}

int decide(const AccessPolicy& policy, double h, RandomStream& rng) {
  if (!(h >= 0.0)) throw std::invalid_argument("decide: channel state must be >= 0");
  if (policy.is_threshold()) return h >= policy.threshold_value() ? 1 : 0;
  return rng.uniform() < policy.rate() ? 1 : 0;
}

AccessPolicy threshold_from_prices(const PricingVector& prices, const FadingChannel& ch) {
  if (!(prices.own_price >= 0.0) || !(prices.interference_price >= 0.0) || !(prices.tx_power > 0.0))
    throw std::invalid_argument("prices must be non-negative with a positive transmit power");
  if (prices.own_price == 0.0) return AccessPolicy::never();
  const double ratio = (prices.tx_power + prices.interference_price) / prices.own_price;
  if (!std::isfinite(ratio) || ratio >= ch.success_supremum()) return AccessPolicy::never();
  if (ratio <= ch.success_at_zero()) return AccessPolicy::always();
  return AccessPolicy::threshold(invert_success_curve(ch, ratio));
}

double evaluate_constant_success(std::span<const double> rates, std::span<const double> mean_q,
                                 const CollisionMatrix& collision, int i) {
  const int m = static_cast<int>(rates.size());
  if (static_cast<int>(mean_q.size()) != m || collision.size() != m)
    throw std::invalid_argument("evaluate_constant_success: length mismatch");
  if (i < 0 || i >= m) throw std::invalid_argument("evaluate_constant_success: index out of range");
  double p = rates[static_cast<std::size_t>(i)] * mean_q[static_cast<std::size_t>(i)];
  for (int j = 0; j < m; ++j) {
    if (j != i) p *= 1.0 - rates[static_cast<std::size_t>(j)] * collision.destroys(j, i);
  }
  return p;
}

}  // namespace randaccess
