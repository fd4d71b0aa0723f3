#pragma once

#include <functional>
#include <string>
#include <vector>

#include "conavg/calculus.hpp"
#include "conavg/operators.hpp"

namespace conavg {

/// Single-valued map on R^n.
using Map = std::function<Vector(const Vector&)>;

/// J_{γA} = (Id + γA)⁻¹ for a catalog operator, with the linear solve (if
/// any) factored once. Cheap to copy; copies share the factorization.
class Resolvent {
 public:
  /// Checks 1+γα > 0 against the monotone certificate or γ+α > 0 against the
  /// comonotone one; at least one must hold.
  Resolvent(const OperatorSpec& op, double gamma);

  Vector operator()(const Vector& x) const;

  double gamma() const { return gamma_; }
  /// Non-fatal numerical notes (e.g. weakly convex prox close to its boundary).
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  Map apply_;
  double gamma_;
  std::vector<std::string> warnings_;
};

/// argmin_z f(z) + ‖z−x‖²/(2γ); requires 1 + γ·alpha_convex > 0.
Vector prox(const FunctionSpec& f, double gamma, const Vector& x);

/// Throws ParameterError when 1 + γ·f.alpha_convex() ≤ 0.
void check_prox_precondition(const FunctionSpec& f, double gamma);

Vector resolvent(const OperatorSpec& op, double gamma, const Vector& x);

/// (1−λ)x + λJ_{γA}x
Vector relaxed_resolvent(const OperatorSpec& op, double gamma, double lambda, const Vector& x);

/// 2J_{γA}x − x
Vector reflected_resolvent(const OperatorSpec& op, double gamma, const Vector& x);

/// (1−λ)Id + λJ_{γA} for α-comonotone A: θ = λγ/(2(γ+α)); needs γ+α > 0.
ConicalCert cert_resolvent_comonotone(double alpha, double gamma, double lambda);

/// For α-monotone A and λ > 1, (1/(1−λ))·((1−λ)Id + λJ_{γA}) is conically
/// λ/(2(λ−1)(1+γα))-averaged; needs 1+γα > 0.
ScaledConicalCert cert_resolvent_monotone(double alpha, double gamma, double lambda);

/// Id − γB for β-cocoercive B: θ = γ/(2β).
ConicalCert cert_forward_step(double beta, double gamma);

/// (γ+2α)⟨x−y, a−b⟩ − α‖x−y‖² − (γ+α)‖a−b‖² with a = J_{γA}x, b = J_{γA}y.
/// Nonnegative when A is α-comonotone.
double comonotone_graph_inequality(double alpha, double gamma, const Vector& x, const Vector& y, const Vector& a,
                                   const Vector& b);

}  // namespace conavg
