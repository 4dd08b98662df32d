#pragma once

#include <cstdint>
#include <span>
#include <variant>

#include "randaccess/access_policy.hpp"
#include "randaccess/linalg.hpp"
#include "randaccess/random.hpp"

namespace randaccess {

// Channel-state distributions. Both are non-atomic with support in [0, inf).
struct ExponentialFading {
  double mean = 1.0;
};

struct UniformFading {
  double low = 0.0;
  double high = 1.0;
};

using FadingDistribution = std::variant<ExponentialFading, UniformFading>;

// Decoding success q(h) = 1 - exp(-kappa * gain * h).
struct SaturatingCurve {
  double kappa = 1.5;
  double gain = 1.0;
};

// Decoding success logistic in received power (dB):
// q(h) = 1 / (1 + exp(-slope * (10 log10(gain h) - midpoint_db))).
struct LogisticDbCurve {
  double slope = 1.0;
  double midpoint_db = 0.0;
  double gain = 1.0;
};

using SuccessCurve = std::variant<SaturatingCurve, LogisticDbCurve>;

class FadingChannel {
 public:
  FadingChannel() : FadingChannel(ExponentialFading{}, SaturatingCurve{}) {}
  // Throws std::invalid_argument on non-positive scale parameters or an empty
  // uniform support.
  FadingChannel(FadingDistribution dist, SuccessCurve curve);

  const FadingDistribution& distribution() const { return dist_; }
  const SuccessCurve& curve() const { return curve_; }

  // q(0) and sup_h q(h).
  double success_at_zero() const;
  double success_supremum() const;

  double density(double h) const;
  double mean() const;

 private:
  FadingDistribution dist_;
  SuccessCurve curve_;
};

// Entry (j, i) is the probability that sensor j's transmission destroys link i
// given both transmit. The diagonal is unused and stored as zero.
class CollisionMatrix {
 public:
  CollisionMatrix() = default;
  // Throws std::invalid_argument on a non-square matrix or entries outside [0, 1].
  explicit CollisionMatrix(Matrix q);
  static CollisionMatrix none(int m) { return CollisionMatrix(Matrix::Zero(m, m)); }

  int size() const { return static_cast<int>(q_.rows()); }
  double destroys(int j, int i) const { return q_(j, i); }
  const Matrix& matrix() const { return q_; }

 private:
  Matrix q_;
};

double sample_channel(const FadingChannel& ch, RandomStream& rng);

// q(h). Throws std::invalid_argument for negative or NaN h.
double decode_success_prob(const FadingChannel& ch, double h);

// h with q(h) = target. +inf when target >= sup q, 0 when target <= q(0).
// Throws std::invalid_argument when target is outside [0, 1].
double invert_success_curve(const FadingChannel& ch, double target);

// How expectations over the channel are evaluated.
struct Quadrature {};
struct MonteCarlo {
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
};
using ExpectationMode = std::variant<Quadrature, MonteCarlo>;

// E[alpha(h)] and E[alpha(h) q(h)] for one sensor. In Monte-Carlo mode both come
// from the same draws, with decoding simulated as a Bernoulli(q(h)) event.
struct PolicyMoments {
  double rate = 0.0;
  double success = 0.0;
};

PolicyMoments policy_moments(const AccessPolicy& policy, const FadingChannel& ch,
                             const ExpectationMode& mode);

double expected_policy_rate(const AccessPolicy& policy, const FadingChannel& ch,
                            const ExpectationMode& mode);
double expected_policy_success(const AccessPolicy& policy, const FadingChannel& ch,
                               const ExpectationMode& mode);

// E[q(h)] over the full distribution.
double expected_decode_success(const FadingChannel& ch);

// P(gamma_i = 1) = E[alpha_i q] * prod_{j != i} (1 - E[alpha_j] q_ji).
double link_success_from_moments(std::span<const PolicyMoments> moments,
                                 const CollisionMatrix& collision, int i);

double link_success_probability(std::span<const AccessPolicy> policies,
                                std::span<const FadingChannel> channels,
                                const CollisionMatrix& collision, int i,
                                const ExpectationMode& mode);

}  // namespace randaccess
