#pragma once

#include <limits>

#include "randaccess/random.hpp"

namespace randaccess {

// A sensor's transmission rule. Threshold policies transmit iff the current
// channel state is at least h_bar (h_bar = +inf never transmits); constant
// policies transmit with a fixed probability regardless of the channel.
// Policies carry no sensor identity.
class AccessPolicy {
 public:
  enum class Kind { kThreshold, kConstant };

  static AccessPolicy threshold(double h_bar);
  static AccessPolicy constant(double rate);
  static AccessPolicy never() { return threshold(std::numeric_limits<double>::infinity()); }
  static AccessPolicy always() { return threshold(0.0); }

  Kind kind() const { return kind_; }
  bool is_threshold() const { return kind_ == Kind::kThreshold; }
  // Only meaningful for the matching kind.
  double threshold_value() const { return value_; }
  double rate() const { return value_; }

  bool never_transmits() const;

  friend bool operator==(const AccessPolicy&, const AccessPolicy&) = default;

 private:
  AccessPolicy(Kind kind, double value) : kind_(kind), value_(value) {}

  Kind kind_;
  double value_;
};

// 1 to transmit, 0 to stay silent. Threshold policies are deterministic and
// transmit on equality; constant policies consume one uniform draw from rng.
int decide(const AccessPolicy& policy, double h, RandomStream& rng);

}  // namespace randaccess
