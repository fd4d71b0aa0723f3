#include <cmath>

#include <fmt/format.h>

#include "conavg/algorithms.hpp"

namespace conavg {

StepSequence StepSequence::constant(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("constant step must be finite and >= 0");
  return {Kind::Constant, lambda};
}

StepSequence StepSequence::harmonic_tail(double c) {
  if (!(c > 0.0 && c <= 1.0)) throw ParameterError("harmonic tail needs c in (0, 1]");
  return {Kind::HarmonicTail, c};
}

double StepSequence::at(std::size_t n, double theta) const {
  if (kind_ == Kind::Constant) return value_;
  return (1.0 / theta) * (1.0 - value_ / static_cast<double>(n + 1));
}

bool StepSequence::in_range(double theta) const {
  if (kind_ == Kind::HarmonicTail) return true;
  return value_ * theta <= 1.0 + 1e-12;
}

bool StepSequence::divergent_sum(double theta) const {
  if (kind_ == Kind::HarmonicTail) return true;
  return value_ > 0.0 && value_ * (1.0 - theta * value_) > 0.0;
}

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Converged:
      return "converged";
    case RunStatus::MaxIter:
      return "max_iter";
    case RunStatus::Diverged:
      return "diverged";
  }
  return "?";
}

IterationTrace km_run(const Map& T, double theta, const Vector& x0, const StepSequence& steps,
                      const KmOptions& options) {
  if (!(theta > 0.0)) throw ParameterError("theta must be > 0");
  require_finite(x0, "x0");
  if (options.enforce_admissible && !steps.in_range(theta)) {
    throw ParameterError(fmt::format("step sequence leaves [0, 1/theta] = [0, {}]", 1.0 / theta));
  }
  if (options.reference) require_same_dim(x0, *options.reference);

  IterationTrace trace;
  trace.tol = options.tol;
  if (!steps.divergent_sum(theta)) {
    trace.warnings.push_back("step sequence does not satisfy sum lambda_n(1 - theta*lambda_n) = inf");
  }

  Vector x = x0;
  for (std::size_t n = 0;; ++n) {
    if (!x.allFinite() || x.norm() > options.divergence_bound) {
      trace.status = RunStatus::Diverged;
      break;
    }
    const Vector Tx = T(x);
    IterationRecord rec;
    rec.n = n;
    rec.residual = (x - Tx).norm();
    rec.rate_stat = std::sqrt(static_cast<double>(n)) * rec.residual;
    if (options.solution) {
      const Vector s = options.shadow ? options.shadow(x) : x;
      rec.dist_to_solution = (s - *options.solution).norm();
    }
    if (options.snapshot_stride > 0 && n % options.snapshot_stride == 0) rec.x = x;

    if (!std::isfinite(rec.residual)) {
      trace.records.push_back(std::move(rec));
      trace.status = RunStatus::Diverged;
      break;
    }
    if (rec.residual <= options.tol) {
      trace.records.push_back(std::move(rec));
      trace.status = RunStatus::Converged;
      break;
    }
    if (n >= options.max_iter) {
      trace.records.push_back(std::move(rec));
      trace.status = RunStatus::MaxIter;
      break;
    }

    const double lambda = steps.at(n, theta);
    Vector next = (1.0 - lambda) * x + lambda * Tx;
    if (options.reference) {
      rec.fejer_gap = (next - *options.reference).norm() - (x - *options.reference).norm();
    }
    trace.records.push_back(std::move(rec));
    x = std::move(next);
  }
  trace.final_x = std::move(x);
  return trace;
}

}  // namespace conavg
