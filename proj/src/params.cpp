#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "conavg/algorithms.hpp"

namespace conavg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Feasibility classify(double lhs, double rhs, double scale) {
  const double diff = lhs - rhs;
  if (std::abs(diff) <= kBoundaryTol * scale) return Feasibility::Boundary;
  return diff < 0.0 ? Feasibility::Strict : Feasibility::Infeasible;
}

struct IntervalForm {
  double gamma0;
  bool gamma_ok;
  double lower, upper;
  Feasibility verdict;
};

// Interval form of (g+d)² ≤ 4(g+α)(d+β): g > γ₀ and d ∈ [g+2α−2√Δ, g+2α+2√Δ]
// with Δ = (g+α)(α+β). `scale` is the tolerance scale of the quadratic in
// these coordinates; the distance to the nearest endpoint is converted to it
// through (d−c)² − 4Δ = (|d−c| − 2√Δ)(|d−c| + 2√Δ).
IntervalForm interval_form(double alpha, double beta, double g, double d, double scale) {
  IntervalForm out{};
  out.gamma0 = gamma_threshold(alpha, beta);
  out.gamma_ok = g > out.gamma0;
  const double Delta = (g + alpha) * std::max(alpha + beta, 0.0);
  const double root = 2.0 * std::sqrt(std::max(Delta, 0.0));
  const double c = g + 2.0 * alpha;
  out.lower = c - root;
  out.upper = c + root;
  if (!out.gamma_ok || Delta < 0.0) {
    out.verdict = Feasibility::Infeasible;
    return out;
  }
  const double outside = std::abs(d - c) - root;  // > 0 outside the interval
  const double width = std::abs(d - c) + root;
  if (std::abs(outside) * width <= kBoundaryTol * scale) {
    out.verdict = Feasibility::Boundary;
  } else {
    out.verdict = outside < 0.0 ? Feasibility::Strict : Feasibility::Infeasible;
  }
  return out;
}

void require_scope(double alpha, double beta, double gamma, double delta) {
  if (!std::isfinite(alpha) || !std::isfinite(beta)) throw ParameterError("alpha and beta must be finite");
  if (alpha + beta < -kCalculusTol) {
    throw ParameterError(fmt::format("alpha + beta >= 0 required, got {}", alpha + beta));
  }
  if (!(gamma > 0.0) || !(delta > 0.0) || !std::isfinite(gamma) || !std::isfinite(delta)) {
    throw ParameterError("gamma and delta must be finite and > 0");
  }
}

bool sum_is_zero(double alpha, double beta) { return std::abs(alpha + beta) <= kCalculusTol; }

}  // namespace

const char* to_string(Feasibility f) {
  switch (f) {
    case Feasibility::Strict:
      return "feasible";
    case Feasibility::Boundary:
      return "boundary";
    case Feasibility::Infeasible:
      return "infeasible";
  }
  return "?";
}

double gamma_threshold(double alpha, double beta) {
  if (alpha >= 0.0) return 0.0;
  // 2β − 2√(β(α+β)) rewritten without cancellation for large β.
  const double ab = std::max(alpha + beta, 0.0);
  return -2.0 * alpha * beta / (beta + std::sqrt(beta * ab));
}

ParamReport validate_params_comonotone(double alpha, double beta, double gamma, double delta) {
  require_scope(alpha, beta, gamma, delta);
  ParamReport r;
  r.regime = MonotonicityKind::Comonotone;
  r.alpha = alpha;
  r.beta = beta;
  r.gamma = gamma;
  r.delta = delta;

  r.lhs = (gamma + delta) * (gamma + delta);
  r.rhs = 4.0 * (gamma + alpha) * (delta + beta);
  const double scale = 1.0 + r.lhs + std::abs(r.rhs);
  r.direct = classify(r.lhs, r.rhs, scale);

  const IntervalForm form = interval_form(alpha, beta, gamma, delta, scale);
  r.verdict = form.verdict;
  r.gamma0 = form.gamma0;
  r.gamma_ok = form.gamma_ok;
  r.Delta = (gamma + alpha) * (alpha + beta);
  r.lower = form.lower;
  r.upper = form.upper;
  r.delta_min = std::max(form.lower, 0.0);
  r.delta_max = form.upper;
  if (!form.gamma_ok || r.delta_max <= 0.0) {
    r.delta_min = kInf;
    r.delta_max = -kInf;
  }
  r.implied_positive = gamma + alpha > 0.0 && delta + beta > 0.0;
  return r;
}

ParamReport validate_params_monotone(double alpha, double beta, double gamma, double delta) {
  require_scope(alpha, beta, gamma, delta);
  ParamReport r;
  r.regime = MonotonicityKind::Monotone;
  r.alpha = alpha;
  r.beta = beta;
  r.gamma = gamma;
  r.delta = delta;

  r.lhs = (gamma + delta) * (gamma + delta);
  r.rhs = 4.0 * gamma * delta * (1.0 + gamma * alpha) * (1.0 + delta * beta);
  const double scale = 1.0 + r.lhs + std::abs(r.rhs);
  r.direct = classify(r.lhs, r.rhs, scale);

  // Same lemma in the variables 1/γ, 1/δ; the quadratic scales by 1/(γδ)².
  const double gd2 = gamma * gamma * delta * delta;
  const IntervalForm form = interval_form(alpha, beta, 1.0 / gamma, 1.0 / delta, scale / gd2);
  r.verdict = form.verdict;
  r.gamma0 = form.gamma0;
  r.gamma_ok = form.gamma_ok;
  r.Delta = gamma * (1.0 + gamma * alpha) * (alpha + beta);
  const double root = 2.0 * std::sqrt(std::max(r.Delta, 0.0));
  r.lower = (1.0 / gamma) * (1.0 + 2.0 * gamma * alpha - root);
  r.upper = (1.0 / gamma) * (1.0 + 2.0 * gamma * alpha + root);
  if (!form.gamma_ok || r.upper <= 0.0) {
    r.delta_min = kInf;
    r.delta_max = -kInf;
  } else {
    r.delta_min = 1.0 / r.upper;
    r.delta_max = r.lower > 0.0 ? 1.0 / r.lower : kInf;
  }
  r.implied_positive = 1.0 + gamma * alpha > 0.0 && 1.0 + delta * beta > 0.0;
  return r;
}

std::optional<double> suggest_delta(MonotonicityKind regime, double alpha, double beta, double gamma) {
  const bool mono = regime == MonotonicityKind::Monotone;
  // Any δ > 0 works for reading off the interval.
  const ParamReport r = mono ? validate_params_monotone(alpha, beta, gamma, 1.0)
                             : validate_params_comonotone(alpha, beta, gamma, 1.0);
  if (!r.gamma_ok || r.upper <= 0.0) return std::nullopt;
  if (sum_is_zero(alpha, beta)) {
    return mono ? gamma / (1.0 + 2.0 * gamma * alpha) : gamma + 2.0 * alpha;
  }
  const double mid = 0.5 * (std::max(r.lower, 0.0) + r.upper);
  return mono ? 1.0 / mid : mid;
}

}  // namespace conavg
