#pragma once

#include <cstdint>
#include <random>

namespace randaccess {

// An explicitly owned random stream. Every consumer of randomness takes one of
// these by reference; nothing in the library touches global RNG state.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for parallel or per-entity use: base seed + index,
  // passed through splitmix64 so neighbouring indices decorrelate.
  static RandomStream derive(std::uint64_t base_seed, std::uint64_t index);

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  bool bernoulli(double p) { return uniform() < p; }
  double exponential(double mean) { return mean * unit_exponential_(engine_); }
  double normal() { return unit_normal_(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::exponential_distribution<double> unit_exponential_{1.0};
  std::normal_distribution<double> unit_normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

}  // namespace randaccess
