#pragma once

#include "randaccess/linalg.hpp"

namespace randaccess {

// One control loop seen as a system that switches between a closed-loop matrix
// (packet delivered) and an open-loop matrix (packet lost), together with the
// quadratic Lyapunov contract V(x) = x^T P x that must contract by decay_rate
// in expectation.
class SwitchedSystem {
 public:
  // Validates square/consistent dimensions, P symmetric positive definite,
  // W symmetric positive semidefinite and decay_rate in (0, 1). Throws
  // std::invalid_argument naming the offending field.
  SwitchedSystem(Matrix a_closed, Matrix a_open, Matrix noise_cov,
                 Matrix lyap_matrix, double decay_rate);

  const Matrix& a_closed() const { return a_closed_; }
  const Matrix& a_open() const { return a_open_; }
  const Matrix& noise_cov() const { return noise_cov_; }
  const Matrix& lyap_matrix() const { return lyap_matrix_; }
  double decay_rate() const { return decay_rate_; }
  int dim() const { return static_cast<int>(a_closed_.rows()); }

  // A_c^T P A_c and A_o^T P A_o, symmetrized.
  const Matrix& closed_gram() const { return closed_gram_; }
  const Matrix& open_gram() const { return open_gram_; }
  // Tr(P W).
  double noise_gain() const { return noise_gain_; }

  double lyapunov(const Vector& x) const { return x.dot(lyap_matrix_ * x); }

 private:
  Matrix a_closed_;
  Matrix a_open_;
  Matrix noise_cov_;
  Matrix lyap_matrix_;
  double decay_rate_;
  Matrix closed_gram_;
  Matrix open_gram_;
  double noise_gain_;
};

// Plant x+ = A x + B u + w, y = C x + v, with a controller that keeps a local
// state z and applies extra terms only when the measurement arrives:
//   z+ = F z + gamma (Fc z + G y)
//   u  = K z + gamma (Kc z + L y)
struct PlantControllerPair {
  Matrix plant_a;
  Matrix plant_b;
  Matrix plant_c;
  Matrix ctrl_f;
  Matrix ctrl_fc;
  Matrix ctrl_g;
  Matrix ctrl_k;
  Matrix ctrl_kc;
  Matrix ctrl_l;
  Matrix process_noise_cov;
  Matrix meas_noise_cov;
};

struct LyapunovContract {
  Matrix lyap_matrix;
  double decay_rate;
};

// Which single noise covariance stands in for the two mode-dependent ones.
enum class NoiseModel {
  kClosedMode,   // covariance of the delivered-packet mode
  kLargerTrace,  // whichever mode has the larger Tr(P W)
};

struct AssembledLoop {
  SwitchedSystem system;
  // Maps [w; v] into the joint (x, z) state for each mode.
  Matrix noise_input_closed;
  Matrix noise_input_open;
  Matrix noise_cov_closed;
  Matrix noise_cov_open;
};

// Joins plant and controller states into one switched system. Throws
// std::invalid_argument on any dimension mismatch.
AssembledLoop assemble_example_loop(const PlantControllerPair& pc,
                                    const LyapunovContract& contract,
                                    NoiseModel noise_model = NoiseModel::kClosedMode);

// lambda_max(theta A_c^T P A_c + (1 - theta) A_o^T P A_o - rho P). The matrix
// inequality with success probability theta holds iff this is <= 0.
double lmi_slack(double theta, const SwitchedSystem& sys);

// Smallest success probability c in [0, 1] with lmi_slack(c) <= 0, by
// bisection to absolute tolerance tol. Returns 0 when the open loop already
// satisfies the contract. Throws InfeasibleContract when even theta = 1 fails.
double compute_success_requirement(const SwitchedSystem& sys, double tol = 1e-9);

// E[V(x+) | x] when the packet gets through with probability success_prob.
double expected_lyapunov_next(const SwitchedSystem& sys, const Vector& x,
                              double success_prob);

// Tr(P W) / (1 - rho): limit of E V(x_k) when the contract holds every step.
double steady_state_cost_bound(const SwitchedSystem& sys);

}  // namespace randaccess
