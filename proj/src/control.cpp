#include "randaccess/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "randaccess/errors.hpp"

namespace randaccess {

namespace {

void require_square(const Matrix& m, Eigen::Index n, const char* name) {
  if (m.rows() != n || m.cols() != n) {
    std::ostringstream os;
    os << name << " must be " << n << "x" << n << ", got " << m.rows() << "x" << m.cols();
    throw std::invalid_argument(os.str());
  }
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << name << " must be " << rows << "x" << cols << ", got " << m.rows() << "x" << m.cols();
    throw std::invalid_argument(os.str());
  }
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

SwitchedSystem::SwitchedSystem(Matrix a_closed, Matrix a_open, Matrix noise_cov,
                               Matrix lyap_matrix, double decay_rate)
    : a_closed_(std::move(a_closed)),
      a_open_(std::move(a_open)),
      noise_cov_(std::move(noise_cov)),
      lyap_matrix_(std::move(lyap_matrix)),
      decay_rate_(decay_rate) {
  const Eigen::Index n = a_closed_.rows();
  if (n == 0) throw std::invalid_argument("a_closed must be non-empty");
  require_square(a_closed_, n, "a_closed");
  require_square(a_open_, n, "a_open");
  require_square(noise_cov_, n, "noise_cov");
  require_square(lyap_matrix_, n, "lyap_matrix");
  if (!a_closed_.allFinite() || !a_open_.allFinite() || !noise_cov_.allFinite() ||
      !lyap_matrix_.allFinite())
    throw std::invalid_argument("system matrices must be finite");
  if (!(decay_rate_ > 0.0 && decay_rate_ < 1.0))
    throw std::invalid_argument("decay_rate must lie in (0, 1), got " + std::to_string(decay_rate_));
  if (!is_symmetric(lyap_matrix_)) throw std::invalid_argument("lyap_matrix must be symmetric");
  if (!is_symmetric(noise_cov_)) throw std::invalid_argument("noise_cov must be symmetric");
  lyap_matrix_ = symmetrized(lyap_matrix_);
  noise_cov_ = symmetrized(noise_cov_);
  if (min_symmetric_eigenvalue(lyap_matrix_) <= 0.0)
    throw std::invalid_argument("lyap_matrix must be positive definite");
  const double w_scale = std::max(1.0, noise_cov_.cwiseAbs().maxCoeff());
  if (min_symmetric_eigenvalue(noise_cov_) < -1e-12 * w_scale)
    throw std::invalid_argument("noise_cov must be positive semidefinite");

  closed_gram_ = symmetrized(a_closed_.transpose() * lyap_matrix_ * a_closed_);
  open_gram_ = symmetrized(a_open_.transpose() * lyap_matrix_ * a_open_);
  noise_gain_ = (lyap_matrix_ * noise_cov_).trace();
}

AssembledLoop assemble_example_loop(const PlantControllerPair& pc,
                                    const LyapunovContract& contract,
                                    NoiseModel noise_model) {
  const Eigen::Index n = pc.plant_a.rows();
  const Eigen::Index nu = pc.plant_b.cols();
  const Eigen::Index ny = pc.plant_c.rows();
  const Eigen::Index nz = pc.ctrl_f.rows();
  if (n == 0) throw std::invalid_argument("plant_a must be non-empty");
  require_square(pc.plant_a, n, "plant_a");
  require_shape(pc.plant_b, n, nu, "plant_b");
  require_shape(pc.plant_c, ny, n, "plant_c");
  require_square(pc.ctrl_f, nz, "ctrl_f");
  require_square(pc.ctrl_fc, nz, "ctrl_fc");
  require_shape(pc.ctrl_g, nz, ny, "ctrl_g");
  require_shape(pc.ctrl_k, nu, nz, "ctrl_k");
  require_shape(pc.ctrl_kc, nu, nz, "ctrl_kc");
  require_shape(pc.ctrl_l, nu, ny, "ctrl_l");
  require_square(pc.process_noise_cov, n, "process_noise_cov");
  require_square(pc.meas_noise_cov, ny, "meas_noise_cov");

  const Eigen::Index dim = n + nz;
  Matrix a_closed(dim, dim);
  a_closed << pc.plant_a + pc.plant_b * pc.ctrl_l * pc.plant_c,
      pc.plant_b * pc.ctrl_k + pc.plant_b * pc.ctrl_kc,
      pc.ctrl_g * pc.plant_c, pc.ctrl_f + pc.ctrl_fc;
  Matrix a_open(dim, dim);
  a_open << pc.plant_a, pc.plant_b * pc.ctrl_k,
      Matrix::Zero(nz, n), pc.ctrl_f;

  // [w; v] enters through [[I, gamma B L], [0, gamma G]].
  Matrix input_closed(dim, n + ny);
  input_closed << Matrix::Identity(n, n), pc.plant_b * pc.ctrl_l,
      Matrix::Zero(nz, n), pc.ctrl_g;
  Matrix input_open(dim, n + ny);
  input_open << Matrix::Identity(n, n), Matrix::Zero(n, ny),
      Matrix::Zero(nz, n), Matrix::Zero(nz, ny);

  Matrix joint_cov = Matrix::Zero(n + ny, n + ny);
  joint_cov.topLeftCorner(n, n) = pc.process_noise_cov;
  joint_cov.bottomRightCorner(ny, ny) = pc.meas_noise_cov;
  const Matrix cov_closed = symmetrized(input_closed * joint_cov * input_closed.transpose());
  const Matrix cov_open = symmetrized(input_open * joint_cov * input_open.transpose());

  require_square(contract.lyap_matrix, dim, "lyap_matrix");
  Matrix cov = cov_closed;
  if (noise_model == NoiseModel::kLargerTrace &&
      (contract.lyap_matrix * cov_open).trace() > (contract.lyap_matrix * cov_closed).trace())
    cov = cov_open;

  return AssembledLoop{
      SwitchedSystem(a_closed, a_open, cov, contract.lyap_matrix, contract.decay_rate),
      input_closed, input_open, cov_closed, cov_open};
}

double lmi_slack(double theta, const SwitchedSystem& sys) {
  if (!(theta >= 0.0 && theta <= 1.0))
    throw std::invalid_argument("lmi_slack: theta must lie in [0, 1]");
  const Matrix m = theta * sys.closed_gram() + (1.0 - theta) * sys.open_gram() -
                   sys.decay_rate() * sys.lyap_matrix();
  return max_symmetric_eigenvalue(m);
}

double compute_success_requirement(const SwitchedSystem& sys, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("compute_success_requirement: tol must be positive");
  if (lmi_slack(0.0, sys) <= 0.0) return 0.0;
  const double closed_slack = lmi_slack(1.0, sys);
  if (closed_slack > 0.0) {
    std::ostringstream os;
    os << "closed-loop admissibility violated: A_c^T P A_c - rho P has eigenvalue "
       << closed_slack << " > 0, so no success probability meets the contract";
    throw InfeasibleContract(os.str());
  }
  // The feasible set in theta is an interval containing 1; keep lo infeasible
  // and hi feasible.
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (lmi_slack(mid, sys) <= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double expected_lyapunov_next(const SwitchedSystem& sys, const Vector& x, double success_prob) {
  if (x.size() != sys.dim()) throw std::invalid_argument("expected_lyapunov_next: state dimension mismatch");
  if (!(success_prob >= 0.0 && success_prob <= 1.0))
    throw std::invalid_argument("expected_lyapunov_next: success_prob must lie in [0, 1]");
  return success_prob * x.dot(sys.closed_gram() * x) +
         (1.0 - success_prob) * x.dot(sys.open_gram() * x) + sys.noise_gain();
}

double steady_state_cost_bound(const SwitchedSystem& sys) {
  return sys.noise_gain() / (1.0 - sys.decay_rate());
}

}  // namespace randaccess
