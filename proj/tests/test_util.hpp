#pragma once

#include <random>

#include "conavg/operators.hpp"

namespace conavg::testutil {

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index dim, double lo = -10.0, double hi = 10.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = u(rng);
  return v;
}

/// Random orthogonal matrix from the QR factor of a Gaussian matrix.
inline Matrix random_orthogonal(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> g;
  Matrix G(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) G(i, j) = g(rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  return qr.householderQ();
}

/// (1−κ)f(x) + κf(y) − f((1−κ)x+κy) − (α/2)κ(1−κ)‖x−y‖²; ≥ 0 for α-convex f.
inline double alpha_convexity_slack(const FunctionSpec& f, double alpha, const Vector& x, const Vector& y,
                                    double kappa) {
  const Vector z = (1.0 - kappa) * x + kappa * y;
  return (1.0 - kappa) * function_value(f, x) + kappa * function_value(f, y) - function_value(f, z) -
         0.5 * alpha * kappa * (1.0 - kappa) * (x - y).squaredNorm();
}

}  // namespace conavg::testutil
