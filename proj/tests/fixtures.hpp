#pragma once

#include <random>
#include <vector>

#include "randaccess/channel.hpp"
#include "randaccess/control.hpp"
#include "randaccess/dual_optimizer.hpp"

namespace fixtures {

using randaccess::Matrix;
using randaccess::Vector;

inline randaccess::SwitchedSystem scalar_system(double a_closed, double a_open, double rho = 0.8,
                                                double w = 1.0, double p = 1.0) {
  return randaccess::SwitchedSystem(Matrix::Constant(1, 1, a_closed), Matrix::Constant(1, 1, a_open),
                                    Matrix::Constant(1, 1, w), Matrix::Constant(1, 1, p), rho);
}

// Two scalar loops sharing an exponential-fading channel with symmetric collisions.
inline randaccess::ProblemInstance two_loop_instance(double collision = 0.5) {
  Matrix q(2, 2);
  q << 0.0, collision, collision, 0.0;
  return randaccess::make_problem_instance(
      {scalar_system(0.5, 1.1), scalar_system(0.4, 1.0)},
      {randaccess::FadingChannel{}, randaccess::FadingChannel{}}, randaccess::CollisionMatrix(q),
      Vector::Ones(2));
}

inline Matrix random_matrix(int n, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Matrix m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = nd(gen);
  return m;
}

inline Matrix random_spd(int n, std::mt19937_64& gen) {
  const Matrix b = random_matrix(n, gen);
  return b * b.transpose() + 0.5 * Matrix::Identity(n, n);
}

// Rescales m so that its spectral radius equals radius.
inline Matrix with_spectral_radius(const Matrix& m, double radius) {
  const double current = m.eigenvalues().cwiseAbs().maxCoeff();
  return m * (radius / current);
}

}  // namespace fixtures
