#pragma once

#include <span>

#include "randaccess/access_policy.hpp"
#include "randaccess/channel.hpp"

namespace randaccess {

// Prices a sensor receives from the access point: the weight of its own loop,
// the summed collision cost it imposes on the other loops, and its transmit
// power.
struct PricingVector {
  double own_price = 0.0;
  double interference_price = 0.0;
  double tx_power = 1.0;
};

// Transmit iff own_price * q(h) >= tx_power + interference_price. Degenerate
// prices (own_price = 0, unbounded interference) give the never-transmit policy.
AccessPolicy threshold_from_prices(const PricingVector& prices, const FadingChannel& ch);

// Success probability of link i when every sensor j transmits with the fixed
// probability rates[j] and decodes with mean probability mean_q[j]:
// rates[i] mean_q[i] prod_{j != i} (1 - rates[j] q_ji).
double evaluate_constant_success(std::span<const double> rates,
                                 std::span<const double> mean_q,
                                 const CollisionMatrix& collision, int i);

}  // namespace randaccess
