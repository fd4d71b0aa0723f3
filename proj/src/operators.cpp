#include "conavg/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace conavg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_square(const Matrix& M, const Vector& b, const char* what) {
  if (M.rows() == 0 || M.rows() != M.cols()) {
    throw DimensionError(fmt::format("{}: matrix must be square and non-empty", what));
  }
  if (b.size() != M.rows()) {
    throw DimensionError(fmt::format("{}: vector has dimension {}, matrix {}", what, b.size(), M.rows()));
  }
  if (!M.allFinite()) throw ParameterError(fmt::format("{}: matrix has a non-finite entry", what));
  require_finite(b, what);
}

Eigen::VectorXd symmetric_eigenvalues(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(S, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ParameterError("symmetric eigensolve failed");
  return solver.eigenvalues();
}

// ⟨d, Sd⟩ − α‖Sd‖² = Σ λᵢ(1 − αλᵢ)dᵢ² in the eigenbasis, so the tight
// constant is min over nonzero eigenvalues of 1/λ.
double symmetric_comonotone(const Matrix& S) {
  const Eigen::VectorXd ev = symmetric_eigenvalues(S);
  const double zero_tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  double alpha = kComonotoneCap;
  for (const double lam : ev) {
    if (std::abs(lam) > zero_tol) alpha = std::min(alpha, 1.0 / lam);
  }
  return alpha;
}

}  // namespace

const char* to_string(MonotonicityKind kind) {
  return kind == MonotonicityKind::Monotone ? "monotone" : "comonotone";
}

bool is_symmetric(const Matrix& M, double tol) {
  return M.rows() == M.cols() && (M - M.transpose()).cwiseAbs().maxCoeff() <= tol;
}

double lambda_min(const Matrix& S) { return symmetric_eigenvalues(S).minCoeff(); }
double lambda_max(const Matrix& S) { return symmetric_eigenvalues(S).maxCoeff(); }

// ---------------------------------------------------------------------------

FunctionSpec FunctionSpec::quadratic(Matrix Q, Vector b) {
  require_square(Q, b, "quadratic");
  if (!is_symmetric(Q)) throw ParameterError("quadratic: Q must be symmetric");
  const double alpha = lambda_min(Q);
  return FunctionSpec(QuadraticFn{std::move(Q), std::move(b)}, alpha);
}

FunctionSpec FunctionSpec::l1(double w) {
  if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("l1: weight must be finite and >= 0");
  return FunctionSpec(L1Fn{w}, 0.0);
}

FunctionSpec FunctionSpec::weakly_convex_l1(double w, double rho) {
  if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("weakly_convex_l1: weight must be finite and >= 0");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ParameterError("weakly_convex_l1: rho must be finite and > 0");
  return FunctionSpec(WeaklyConvexL1Fn{w, rho}, -rho);
}

FunctionSpec FunctionSpec::box_indicator(Vector lo, Vector hi) {
  require_finite(lo, "box lower bound");
  require_finite(hi, "box upper bound");
  require_same_dim(lo, hi);
  if ((lo.array() > hi.array()).any()) throw ParameterError("box: lo must be <= hi componentwise");
  return FunctionSpec(BoxIndicatorFn{std::move(lo), std::move(hi)}, 0.0);
}

std::optional<Eigen::Index> FunctionSpec::dimension() const {
  return std::visit(overloaded{[](const QuadraticFn& q) -> std::optional<Eigen::Index> { return q.b.size(); },
                               [](const BoxIndicatorFn& b) -> std::optional<Eigen::Index> { return b.lo.size(); },
                               [](const auto&) -> std::optional<Eigen::Index> { return std::nullopt; }},
                    variant_);
}

std::string FunctionSpec::name() const {
  return std::visit(overloaded{[](const QuadraticFn&) { return std::string("quadratic"); },
                               [](const L1Fn&) { return std::string("l1"); },
                               [](const WeaklyConvexL1Fn&) { return std::string("weakly_convex_l1"); },
                               [](const BoxIndicatorFn&) { return std::string("box"); }},
                    variant_);
}

double function_value(const FunctionSpec& f, const Vector& x) {
  if (auto d = f.dimension(); d && *d != x.size()) {
    throw DimensionError(fmt::format("{}: dimension {} vs {}", f.name(), *d, x.size()));
  }
  return std::visit(
      overloaded{[&](const QuadraticFn& q) { return 0.5 * x.dot(q.Q * x) + q.b.dot(x); },
                 [&](const L1Fn& l) { return l.w * x.lpNorm<1>(); },
                 [&](const WeaklyConvexL1Fn& l) { return l.w * x.lpNorm<1>() - 0.5 * l.rho * x.squaredNorm(); },
                 [&](const BoxIndicatorFn& b) {
                   const bool inside = (x.array() >= b.lo.array()).all() && (x.array() <= b.hi.array()).all();
                   return inside ? 0.0 : std::numeric_limits<double>::infinity();
                 }},
      f.variant());
}

// ---------------------------------------------------------------------------

OperatorSpec::OperatorSpec(Variant v) : variant_(std::move(v)) {
  certs_.push_back({MonotonicityKind::Monotone, certify_monotone(*this), true});
  if (auto co = certify_comonotone(*this)) certs_.push_back({MonotonicityKind::Comonotone, *co, true});
}

OperatorSpec OperatorSpec::affine(Matrix M, Vector b) {
  require_square(M, b, "affine");
  return OperatorSpec(AffineOp{std::move(M), std::move(b)});
}

OperatorSpec OperatorSpec::scaled_identity(double a) {
  if (!std::isfinite(a)) throw ParameterError("scaled_identity: a must be finite");
  return OperatorSpec(ScaledIdentityOp{a});
}

OperatorSpec OperatorSpec::grad_quadratic(Matrix Q, Vector c) {
  require_square(Q, c, "grad_quadratic");
  if (!is_symmetric(Q)) throw ParameterError("grad_quadratic: Q must be symmetric");
  return OperatorSpec(GradQuadraticOp{std::move(Q), std::move(c)});
}

OperatorSpec OperatorSpec::subdifferential(FunctionSpec f) { return OperatorSpec(SubdifferentialOp{std::move(f)}); }

std::optional<MonotonicityCert> OperatorSpec::cert(MonotonicityKind kind) const {
  for (const auto& c : certs_) {
    if (c.kind == kind) return c;
  }
  return std::nullopt;
}

std::optional<Eigen::Index> OperatorSpec::dimension() const {
  return std::visit(overloaded{[](const AffineOp& a) -> std::optional<Eigen::Index> { return a.b.size(); },
                               [](const ScaledIdentityOp&) -> std::optional<Eigen::Index> { return std::nullopt; },
                               [](const GradQuadraticOp& g) -> std::optional<Eigen::Index> { return g.c.size(); },
                               [](const SubdifferentialOp& s) { return s.f.dimension(); }},
                    variant_);
}

std::string OperatorSpec::name() const {
  return std::visit(overloaded{[](const AffineOp&) { return std::string("affine"); },
                               [](const ScaledIdentityOp&) { return std::string("scaled_identity"); },
                               [](const GradQuadraticOp&) { return std::string("grad_quadratic"); },
                               [](const SubdifferentialOp& s) { return "subdifferential(" + s.f.name() + ")"; }},
                    variant_);
}

Vector evaluate(const OperatorSpec& op, const Vector& x) {
  if (auto d = op.dimension(); d && *d != x.size()) {
    throw DimensionError(fmt::format("{}: dimension {} vs {}", op.name(), *d, x.size()));
  }
  return std::visit(overloaded{[&](const AffineOp& a) -> Vector { return a.M * x + a.b; },
                               [&](const ScaledIdentityOp& s) -> Vector { return s.a * x; },
                               [&](const GradQuadraticOp& g) -> Vector { return g.Q * x + g.c; },
                               [&](const SubdifferentialOp& s) -> Vector {
                                 throw ParameterError(s.f.name() + " subdifferential is not pointwise-evaluable");
                               }},
                    op.variant());
}

double certify_monotone(const OperatorSpec& op) {
  return std::visit(overloaded{[](const AffineOp& a) { return lambda_min(0.5 * (a.M + a.M.transpose())); },
                               [](const ScaledIdentityOp& s) { return s.a; },
                               [](const GradQuadraticOp& g) { return lambda_min(g.Q); },
                               [](const SubdifferentialOp& s) { return s.f.alpha_convex(); }},
                    op.variant());
}

std::optional<double> certify_comonotone(const OperatorSpec& op) {
  return std::visit(
      overloaded{[](const AffineOp& a) -> std::optional<double> {
                   if (is_symmetric(a.M)) return symmetric_comonotone(a.M);
                   // Monotone ⇒ 0-comonotone; the tight constant for a general
                   // nonsymmetric map is not attempted.
                   if (lambda_min(0.5 * (a.M + a.M.transpose())) >= 0.0) return 0.0;
                   return std::nullopt;
                 },
                 [](const ScaledIdentityOp& s) -> std::optional<double> {
                   return s.a == 0.0 ? kComonotoneCap : 1.0 / s.a;
                 },
                 [](const GradQuadraticOp& g) -> std::optional<double> { return symmetric_comonotone(g.Q); },
                 [](const SubdifferentialOp& s) -> std::optional<double> {
                   if (const auto* q = s.f.get_if<QuadraticFn>()) return symmetric_comonotone(q->Q);
                   if (s.f.alpha_convex() >= 0.0) return 0.0;
                   return std::nullopt;
                 }},
      op.variant());
}

}  // namespace conavg
