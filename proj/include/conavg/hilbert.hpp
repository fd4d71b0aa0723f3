#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace conavg {

/// Point of the working space R^n. Entries are finite once it has passed
/// through make_vector / require_finite.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Operands of mismatched dimension.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter violates the hypothesis of the rule being applied. The message
/// names the failing inequality.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Vector make_vector(std::initializer_list<double> entries);
Vector make_vector(std::span<const double> entries);

/// Throws ParameterError when v is empty or has a NaN/inf entry.
void require_finite(const Vector& v, const char* what = "vector");

void require_same_dim(const Vector& a, const Vector& b);

double inner(const Vector& a, const Vector& b);
double squared_norm(const Vector& v);

/// |‖σs+τt‖² − (σ(σ+τ)‖s‖² + τ(σ+τ)‖t‖² − στ‖s−t‖²)|
double identity_residual(double sigma, double tau, const Vector& s, const Vector& t);

/// |σ‖s‖² + τ‖t‖² − (‖σs+τt‖²/(σ+τ) + στ‖s−t‖²/(σ+τ))|.
/// Rejects |σ+τ| ≤ 1e-14·(|σ|+|τ|+1).
double identity2_residual(double sigma, double tau, const Vector& s, const Vector& t);

}  // namespace conavg
