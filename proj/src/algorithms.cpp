#include "conavg/algorithms.hpp"

#include <cmath>

#include <fmt/format.h>

namespace conavg {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(fmt::format("{} must be finite and > 0 (got {})", name, v));
}

MonotonicityCert require_cert(const OperatorSpec& op, MonotonicityKind kind, const char* role) {
  auto c = op.cert(kind);
  if (!c || !c->maximal) {
    throw InfeasibleError(fmt::format("operator {} ({}) has no maximal {} certificate", role, op.name(), to_string(kind)));
  }
  return *c;
}

void finish(AlgorithmInstance& inst) {
  inst.cert = ConicalCert(inst.kappa / inst.kappa_star);
  inst.guaranteed = inst.kappa < inst.kappa_star;
  if (!inst.guaranteed) {
    inst.warnings.push_back(
        fmt::format("convergence not guaranteed: kappa = {} >= kappa* = {}", inst.kappa, inst.kappa_star));
  }
}

void append(std::vector<std::string>& dst, const std::vector<std::string>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

std::string describe(const ParamReport& r) {
  const char* var = r.regime == MonotonicityKind::Monotone ? "1/delta" : "delta";
  return fmt::format("gamma0 = {}, Delta = {}, {} interval = [{}, {}], admissible delta in [{}, {}]", r.gamma0, r.Delta,
                     var, r.lower, r.upper, r.delta_min, r.delta_max);
}

}  // namespace

const char* to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::RPP:
      return "rpp";
    case AlgorithmKind::RFB:
      return "rfb";
    case AlgorithmKind::ADRComonotone:
      return "adr_comonotone";
    case AlgorithmKind::ADRMonotone:
      return "adr_monotone";
  }
  return "?";
}

double kappa_star_rpp(double alpha, double gamma) {
  require_positive(gamma, "gamma");
  if (!(gamma > -alpha)) {
    throw InfeasibleError(fmt::format("rpp needs gamma > max{{0, -alpha}}: gamma = {}, alpha = {}", gamma, alpha));
  }
  return 2.0 * (gamma + alpha) / gamma;
}

double kappa_star_rfb(double alpha, double beta, double gamma) {
  require_positive(gamma, "gamma");
  if (!(beta > 0.0)) throw InfeasibleError(fmt::format("rfb needs beta > 0 (B cocoercive), got {}", beta));
  const double sum = alpha + beta;
  if (std::abs(sum) <= kCalculusTol) {
    if (std::abs(gamma - 2.0 * beta) <= kCalculusTol * (1.0 + 2.0 * beta)) return 1.0;
    throw InfeasibleError(
        fmt::format("rfb with alpha + beta = 0 needs gamma = 2*beta = {}, got {}", 2.0 * beta, gamma));
  }
  if (sum < 0.0) throw InfeasibleError(fmt::format("rfb needs alpha + beta >= 0, got {}", sum));
  const double root = std::sqrt(beta * sum);
  const double lower = std::max(0.0, -2.0 * alpha * beta / (beta + root));  // 2β − 2√(β(α+β))
  const double upper = 2.0 * beta + 2.0 * root;
  if (!(gamma < upper)) {
    throw InfeasibleError(fmt::format("rfb needs gamma < 2*beta + 2*sqrt(beta*(alpha+beta)) = {}, got {}", upper, gamma));
  }
  if (!(gamma > lower)) {
    throw InfeasibleError(
        fmt::format("rfb needs gamma > max{{0, 2*beta - 2*sqrt(beta*(alpha+beta))}} = {}, got {}", lower, gamma));
  }
  return (4.0 * (gamma + alpha) * beta - gamma * gamma) / (2.0 * gamma * sum);
}

double kappa_star_adr(MonotonicityKind regime, double alpha, double beta, double gamma, double delta) {
  const double sum = alpha + beta;
  if (std::abs(sum) <= kCalculusTol) return 1.0;
  const double gd = gamma + delta;
  if (regime == MonotonicityKind::Comonotone) {
    return (4.0 * (gamma + alpha) * (delta + beta) - gd * gd) / (2.0 * gd * sum);
  }
  return (4.0 * gamma * delta * (1.0 + gamma * alpha) * (1.0 + delta * beta) - gd * gd) /
         (2.0 * gamma * delta * gd * sum);
}

AlgorithmInstance build_rpp(const OperatorSpec& A, double gamma, double kappa) {
  require_positive(kappa, "kappa");
  const double alpha = require_cert(A, MonotonicityKind::Comonotone, "A").alpha;

  AlgorithmInstance inst;
  inst.kind = AlgorithmKind::RPP;
  inst.gamma = gamma;
  inst.kappa = kappa;
  inst.kappa_star = kappa_star_rpp(alpha, gamma);
  Resolvent J(A, gamma);
  append(inst.warnings, J.warnings());
  inst.map = [J, kappa](const Vector& x) -> Vector { return (1.0 - kappa) * x + kappa * J(x); };
  inst.solution_map = [](const Vector& x) -> Vector { return x; };
  finish(inst);
  return inst;
}

AlgorithmInstance build_rfb(const OperatorSpec& A, const OperatorSpec& B, double gamma, double kappa) {
  require_positive(kappa, "kappa");
  const double alpha = require_cert(A, MonotonicityKind::Comonotone, "A").alpha;
  const double beta = require_cert(B, MonotonicityKind::Comonotone, "B").alpha;
  if (!B.pointwise_evaluable()) throw InfeasibleError("rfb needs a pointwise-evaluable B for the forward step");
  if (auto da = A.dimension(), db = B.dimension(); da && db && *da != *db) {
    throw DimensionError(fmt::format("A has dimension {}, B {}", *da, *db));
  }

  AlgorithmInstance inst;
  inst.kind = AlgorithmKind::RFB;
  inst.gamma = gamma;
  inst.kappa = kappa;
  inst.kappa_star = kappa_star_rfb(alpha, beta, gamma);
  Resolvent J(A, gamma);
  append(inst.warnings, J.warnings());
  inst.map = [J, B, gamma, kappa](const Vector& x) -> Vector {
    return (1.0 - kappa) * x + kappa * J(x - gamma * evaluate(B, x));
  };
  inst.solution_map = [](const Vector& x) -> Vector { return x; };
  finish(inst);
  return inst;
}

AlgorithmInstance build_adr(const OperatorSpec& A, const OperatorSpec& B, double gamma, double delta, double kappa,
                            MonotonicityKind regime, bool swapped) {
  require_positive(kappa, "kappa");
  const double alpha = require_cert(A, regime, "A").alpha;
  const double beta = require_cert(B, regime, "B").alpha;
  if (auto da = A.dimension(), db = B.dimension(); da && db && *da != *db) {
    throw DimensionError(fmt::format("A has dimension {}, B {}", *da, *db));
  }

  const bool mono = regime == MonotonicityKind::Monotone;
  const ParamReport report = mono ? validate_params_monotone(alpha, beta, gamma, delta)
                                  : validate_params_comonotone(alpha, beta, gamma, delta);

  if (std::abs(alpha + beta) <= kCalculusTol) {
    // Case α+β = 0: only the single coupled δ is admissible, with κ* = 1.
    const double expected = mono ? gamma / (1.0 + 2.0 * gamma * alpha) : gamma + 2.0 * alpha;
    const bool gamma_ok = mono ? 1.0 + 2.0 * gamma * alpha > 0.0 : gamma > std::max(0.0, -2.0 * alpha);
    if (!gamma_ok) {
      throw InfeasibleError(mono ? fmt::format("needs 1 + 2*gamma*alpha > 0, got {}", 1.0 + 2.0 * gamma * alpha)
                                 : fmt::format("needs gamma > max{{0, -2*alpha}} = {}, got {}",
                                               std::max(0.0, -2.0 * alpha), gamma),
                            report);
    }
    if (std::abs(delta - expected) > kCalculusTol * (1.0 + expected)) {
      throw InfeasibleError(fmt::format("alpha + beta = 0 requires delta = {} (got {}); {}", expected, delta,
                                        describe(report)),
                            report);
    }
  } else if (report.verdict != Feasibility::Strict) {
    throw InfeasibleError(fmt::format("(gamma, delta) = ({}, {}) is {}: {}", gamma, delta, to_string(report.verdict),
                                      describe(report)),
                          report);
  }

  AlgorithmInstance inst;
  inst.kind = mono ? AlgorithmKind::ADRMonotone : AlgorithmKind::ADRComonotone;
  inst.gamma = gamma;
  inst.delta = delta;
  inst.kappa = kappa;
  inst.lambda = 1.0 + delta / gamma;
  inst.mu = 1.0 + gamma / delta;
  inst.swapped = swapped;
  inst.report = report;
  inst.kappa_star = kappa_star_adr(regime, alpha, beta, gamma, delta);
  if (!(inst.kappa_star > 0.0)) {
    throw InfeasibleError(fmt::format("kappa* = {} is not > 0; {}", inst.kappa_star, describe(report)), report);
  }

  Resolvent JA(A, gamma);
  Resolvent JB(B, delta);
  append(inst.warnings, JA.warnings());
  append(inst.warnings, JB.warnings());
  const double lam = *inst.lambda;
  const double mu = *inst.mu;
  auto R1 = [JA, lam](const Vector& x) -> Vector { return (1.0 - lam) * x + lam * JA(x); };
  auto R2 = [JB, mu](const Vector& x) -> Vector { return (1.0 - mu) * x + mu * JB(x); };
  if (!swapped) {
    inst.map = [R1, R2, kappa](const Vector& x) -> Vector { return (1.0 - kappa) * x + kappa * R2(R1(x)); };
    inst.solution_map = [JA](const Vector& x) -> Vector { return JA(x); };
  } else {
    inst.map = [R1, R2, kappa](const Vector& x) -> Vector { return (1.0 - kappa) * x + kappa * R1(R2(x)); };
    inst.solution_map = [JB](const Vector& x) -> Vector { return JB(x); };
  }
  finish(inst);
  return inst;
}

AlgorithmInstance convex_min_instance(const FunctionSpec& f, const FunctionSpec& g, double gamma, double delta,
                                      double kappa, bool swapped) {
  return build_adr(OperatorSpec::subdifferential(f), OperatorSpec::subdifferential(g), gamma, delta, kappa,
                   MonotonicityKind::Monotone, swapped);
}

ShadowPoint shadow(const AlgorithmInstance& instance, const Vector& fixed_point) {
  const double res = (fixed_point - instance.map(fixed_point)).norm();
  return {instance.solution_map(fixed_point), res};
}

IterationTrace run(const AlgorithmInstance& instance, const Vector& x0, const StepSequence& steps,
                   KmOptions options) {
  if (!options.shadow) options.shadow = instance.solution_map;
  IterationTrace trace = km_run(instance.map, instance.cert.theta, x0, steps, options);
  trace.warnings.insert(trace.warnings.begin(), instance.warnings.begin(), instance.warnings.end());
  return trace;
}

}  // namespace conavg
