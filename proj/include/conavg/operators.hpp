#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "conavg/hilbert.hpp"

namespace conavg {

/// Zero operator is α-comonotone for every α; this finite stand-in is what
/// certify_comonotone reports for it.
inline constexpr double kComonotoneCap = 1e12;

enum class MonotonicityKind { Monotone, Comonotone };

const char* to_string(MonotonicityKind kind);

/// "⟨x−y, u−v⟩ ≥ α‖x−y‖²" (Monotone) or "≥ α‖u−v‖²" (Comonotone).
/// α > 0 strong/cocoercive, α = 0 plain, α < 0 weak/cohypomonotone.
struct MonotonicityCert {
  MonotonicityKind kind = MonotonicityKind::Monotone;
  double alpha = 0.0;
  bool maximal = false;
};

// ---------------------------------------------------------------------------
// α-convex functions

struct QuadraticFn {
  Matrix Q;  // symmetric
  Vector b;
};
struct L1Fn {
  double w = 1.0;
};
/// f(x) = w‖x‖₁ − (ρ/2)‖x‖²
struct WeaklyConvexL1Fn {
  double w = 1.0;
  double rho = 0.0;
};
struct BoxIndicatorFn {
  Vector lo;
  Vector hi;
};

/// Separable/quadratic function from the prox catalog. Immutable; build via
/// the named constructors, which validate and fix alpha_convex analytically.
class FunctionSpec {
 public:
  using Variant = std::variant<QuadraticFn, L1Fn, WeaklyConvexL1Fn, BoxIndicatorFn>;

  static FunctionSpec quadratic(Matrix Q, Vector b);
  static FunctionSpec l1(double w);
  static FunctionSpec weakly_convex_l1(double w, double rho);
  static FunctionSpec box_indicator(Vector lo, Vector hi);

  const Variant& variant() const { return variant_; }
  double alpha_convex() const { return alpha_convex_; }
  /// Fixed dimension, or nullopt for dimension-free variants (L1, weakly convex L1).
  std::optional<Eigen::Index> dimension() const;
  std::string name() const;

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&variant_);
  }

 private:
  FunctionSpec(Variant v, double alpha) : variant_(std::move(v)), alpha_convex_(alpha) {}

  Variant variant_;
  double alpha_convex_;
};

/// Quadratic → ½xᵀQx + bᵀx, L1 → w‖x‖₁, weakly convex L1 → w‖x‖₁ − (ρ/2)‖x‖²,
/// box → 0 inside, +inf outside.
double function_value(const FunctionSpec& f, const Vector& x);

// ---------------------------------------------------------------------------
// Operators

struct AffineOp {
  Matrix M;
  Vector b;
};
struct ScaledIdentityOp {
  double a = 1.0;
};
struct GradQuadraticOp {
  Matrix Q;  // symmetric
  Vector c;
};
struct SubdifferentialOp {
  FunctionSpec f;
};

/// Single-valued catalog operator with its analytic monotonicity
/// certificates. Certificates are derived at construction; a subdifferential
/// is reached only through its resolvent.
class OperatorSpec {
 public:
  using Variant = std::variant<AffineOp, ScaledIdentityOp, GradQuadraticOp, SubdifferentialOp>;

  static OperatorSpec affine(Matrix M, Vector b);
  static OperatorSpec scaled_identity(double a);
  static OperatorSpec grad_quadratic(Matrix Q, Vector c);
  static OperatorSpec subdifferential(FunctionSpec f);

  const Variant& variant() const { return variant_; }
  const std::vector<MonotonicityCert>& certs() const { return certs_; }
  std::optional<MonotonicityCert> cert(MonotonicityKind kind) const;

  std::optional<Eigen::Index> dimension() const;
  bool pointwise_evaluable() const { return !std::holds_alternative<SubdifferentialOp>(variant_); }
  std::string name() const;

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&variant_);
  }

 private:
  explicit OperatorSpec(Variant v);

  Variant variant_;
  std::vector<MonotonicityCert> certs_;
};

/// Throws for subdifferentials ("not pointwise-evaluable") and on dimension mismatch.
Vector evaluate(const OperatorSpec& op, const Vector& x);

/// Largest α with op α-monotone.
double certify_monotone(const OperatorSpec& op);

/// Tight α-comonotonicity constant where one is known analytically; nullopt
/// means "no certificate", not a disproof.
std::optional<double> certify_comonotone(const OperatorSpec& op);

/// Smallest / largest eigenvalue of a symmetric matrix.
double lambda_min(const Matrix& S);
double lambda_max(const Matrix& S);
bool is_symmetric(const Matrix& M, double tol = 1e-12);

}  // namespace conavg
