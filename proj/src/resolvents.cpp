#include "conavg/resolvents.hpp"

#include <cmath>
#include <memory>

#include <fmt/format.h>

namespace conavg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Vector soft_threshold(const Vector& x, double t) {
  return x.unaryExpr([t](double v) { return std::copysign(std::max(std::abs(v) - t, 0.0), v); });
}

void require_dim(std::optional<Eigen::Index> expected, const Vector& x, const std::string& what) {
  if (expected && *expected != x.size()) {
    throw DimensionError(fmt::format("{}: dimension {} vs {}", what, *expected, x.size()));
  }
}

// Solver for (I + γM) y = x − γb, factored once.
Map affine_solver(const Matrix& M, const Vector& b, double gamma, const std::string& what) {
  const Eigen::Index n = M.rows();
  const Matrix system = Matrix::Identity(n, n) + gamma * M;
  auto lu = std::make_shared<const Eigen::PartialPivLU<Matrix>>(system);
  if (!(lu->rcond() > 1e-14)) {
    throw ParameterError(fmt::format("{}: I + gamma*M is singular for gamma = {}", what, gamma));
  }
  Vector shift = gamma * b;
  return [lu, shift = std::move(shift), n, what](const Vector& x) -> Vector {
    require_dim(n, x, what);
    return lu->solve(x - shift);
  };
}

Map prox_map(const FunctionSpec& f, double gamma) {
  check_prox_precondition(f, gamma);
  return std::visit(
      overloaded{[&](const QuadraticFn& q) -> Map { return affine_solver(q.Q, q.b, gamma, "prox(quadratic)"); },
                 [&](const L1Fn& l) -> Map {
                   const double t = gamma * l.w;
                   return [t](const Vector& x) -> Vector { return soft_threshold(x, t); };
                 },
                 [&](const WeaklyConvexL1Fn& l) -> Map {
                   const double t = gamma * l.w;
                   const double scale = 1.0 - gamma * l.rho;
                   return [t, scale](const Vector& x) -> Vector { return soft_threshold(x, t) / scale; };
                 },
                 [&](const BoxIndicatorFn& b) -> Map {
                   return [lo = b.lo, hi = b.hi](const Vector& x) -> Vector {
                     require_dim(lo.size(), x, "prox(box)");
                     return x.cwiseMax(lo).cwiseMin(hi);
                   };
                 }},
      f.variant());
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(fmt::format("{} must be finite and > 0 (got {})", name, v));
}

}  // namespace

void check_prox_precondition(const FunctionSpec& f, double gamma) {
  require_positive(gamma, "gamma");
  const double margin = 1.0 + gamma * f.alpha_convex();
  if (!(margin > 0.0)) {
    throw ParameterError(fmt::format("prox of {} needs 1 + gamma*alpha > 0, got 1 + {}*{} = {}", f.name(), gamma,
                                     f.alpha_convex(), margin));
  }
}

Resolvent::Resolvent(const OperatorSpec& op, double gamma) : gamma_(gamma) {
  require_positive(gamma, "gamma");
  const auto mono = op.cert(MonotonicityKind::Monotone);
  const auto co = op.cert(MonotonicityKind::Comonotone);
  const bool mono_ok = mono && 1.0 + gamma * mono->alpha > 0.0;
  const bool co_ok = co && gamma + co->alpha > 0.0;
  if (!mono_ok && !co_ok) {
    std::string why = fmt::format("resolvent of {} undefined for gamma = {}:", op.name(), gamma);
    if (mono) why += fmt::format(" 1 + gamma*alpha = {} <= 0 (alpha-monotone, alpha = {});", 1.0 + gamma * mono->alpha, mono->alpha);
    if (co) why += fmt::format(" gamma + alpha = {} <= 0 (alpha-comonotone, alpha = {});", gamma + co->alpha, co->alpha);
    throw ParameterError(why);
  }

  apply_ = std::visit(
      overloaded{[&](const AffineOp& a) -> Map { return affine_solver(a.M, a.b, gamma, "resolvent(affine)"); },
                 [&](const ScaledIdentityOp& s) -> Map {
                   const double denom = 1.0 + gamma * s.a;
                   return [denom](const Vector& x) -> Vector { return x / denom; };
                 },
                 [&](const GradQuadraticOp& g) -> Map {
                   return affine_solver(g.Q, g.c, gamma, "resolvent(grad_quadratic)");
                 },
                 [&](const SubdifferentialOp& s) -> Map {
                   if (const auto* w = s.f.get_if<WeaklyConvexL1Fn>(); w && 1.0 - gamma * w->rho < 1e-6) {
                     warnings_.push_back(fmt::format("weakly convex l1 prox near its limit: 1 - gamma*rho = {:.3g}",
                                                     1.0 - gamma * w->rho));
                   }
                   return prox_map(s.f, gamma);
                 }},
      op.variant());
}

Vector Resolvent::operator()(const Vector& x) const { return apply_(x); }

Vector prox(const FunctionSpec& f, double gamma, const Vector& x) {
  require_dim(f.dimension(), x, "prox(" + f.name() + ")");
  return prox_map(f, gamma)(x);
}

Vector resolvent(const OperatorSpec& op, double gamma, const Vector& x) {
  require_dim(op.dimension(), x, "resolvent(" + op.name() + ")");
  return Resolvent(op, gamma)(x);
}

Vector relaxed_resolvent(const OperatorSpec& op, double gamma, double lambda, const Vector& x) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be finite and >= 0");
  return (1.0 - lambda) * x + lambda * resolvent(op, gamma, x);
}

Vector reflected_resolvent(const OperatorSpec& op, double gamma, const Vector& x) {
  return relaxed_resolvent(op, gamma, 2.0, x);
}

ConicalCert cert_resolvent_comonotone(double alpha, double gamma, double lambda) {
  require_positive(gamma, "gamma");
  require_positive(lambda, "lambda");
  if (!(gamma + alpha > 0.0)) {
    throw ParameterError(fmt::format("needs gamma + alpha > 0, got {} + {} = {}", gamma, alpha, gamma + alpha));
  }
  return ConicalCert(lambda * gamma / (2.0 * (gamma + alpha)));
}

ScaledConicalCert cert_resolvent_monotone(double alpha, double gamma, double lambda) {
  require_positive(gamma, "gamma");
  if (!(1.0 + gamma * alpha > 0.0)) {
    throw ParameterError(fmt::format("needs 1 + gamma*alpha > 0, got {}", 1.0 + gamma * alpha));
  }
  if (!(lambda > 1.0) || !std::isfinite(lambda)) {
    throw ParameterError(fmt::format("needs lambda > 1, got {}", lambda));
  }
  return {1.0 / (1.0 - lambda), lambda / (2.0 * (lambda - 1.0) * (1.0 + gamma * alpha))};
}

ConicalCert cert_forward_step(double beta, double gamma) {
  require_positive(beta, "beta");
  require_positive(gamma, "gamma");
  return ConicalCert(gamma / (2.0 * beta));
}

double comonotone_graph_inequality(double alpha, double gamma, const Vector& x, const Vector& y, const Vector& a,
                                   const Vector& b) {
  require_same_dim(x, y);
  require_same_dim(a, b);
  require_same_dim(x, a);
  const Vector dx = x - y;
  const Vector da = a - b;
  return (gamma + 2.0 * alpha) * dx.dot(da) - alpha * dx.squaredNorm() - (gamma + alpha) * da.squaredNorm();
}

}  // namespace conavg
