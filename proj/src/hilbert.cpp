#include "conavg/hilbert.hpp"

#include <cmath>

#include <fmt/format.h>

namespace conavg {

Vector make_vector(std::initializer_list<double> entries) {
  return make_vector(std::span<const double>(entries.begin(), entries.size()));
}

Vector make_vector(std::span<const double> entries) {
  Vector v(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) v(static_cast<Eigen::Index>(i)) = entries[i];
  require_finite(v);
  return v;
}

void require_finite(const Vector& v, const char* what) {
  if (v.size() == 0) throw ParameterError(fmt::format("{} must have dimension >= 1", what));
  if (!v.allFinite()) throw ParameterError(fmt::format("{} has a non-finite entry", what));
}

void require_same_dim(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw DimensionError(fmt::format("dimension mismatch: {} vs {}", a.size(), b.size()));
  }
}

double inner(const Vector& a, const Vector& b) {
  require_same_dim(a, b);
  return a.dot(b);
}

double squared_norm(const Vector& v) { return v.squaredNorm(); }

double identity_residual(double sigma, double tau, const Vector& s, const Vector& t) {
  require_same_dim(s, t);
  const double lhs = (sigma * s + tau * t).squaredNorm();
  const double rhs = sigma * (sigma + tau) * s.squaredNorm() + tau * (sigma + tau) * t.squaredNorm() -
                     sigma * tau * (s - t).squaredNorm();
  return std::abs(lhs - rhs);
}

double identity2_residual(double sigma, double tau, const Vector& s, const Vector& t) {
  require_same_dim(s, t);
  const double sum = sigma + tau;
  if (std::abs(sum) <= 1e-14 * (std::abs(sigma) + std::abs(tau) + 1.0)) {
    throw ParameterError("identity requires sigma + tau != 0");
  }
  const double lhs = sigma * s.squaredNorm() + tau * t.squaredNorm();
  const double rhs = (sigma * s + tau * t).squaredNorm() / sum + sigma * tau / sum * (s - t).squaredNorm();
  return std::abs(lhs - rhs);
}

}  // namespace conavg
