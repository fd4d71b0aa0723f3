#include "conavg/calculus.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace conavg {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(fmt::format("{} must be finite and > 0 (got {})", name, v));
}

bool is_one(double theta) { return std::abs(theta - 1.0) <= kCalculusTol; }

}  // namespace

ConicalCert::ConicalCert(double t) : theta(t) { require_positive(t, "theta"); }

ScaledConicalCert::ScaledConicalCert(double w, double t) : omega(w), theta(t) {
  if (w == 0.0 || !std::isfinite(w)) throw ParameterError("omega must be finite and nonzero");
  require_positive(t, "theta");
}

ChainConditionError::ChainConditionError(std::size_t k, double theta_k, double bound)
    : NotCoveredError(fmt::format("chain condition violated at position {}: theta_{} = {} is not < {}", k, k,
                                  theta_k, bound)),
      position_(k) {}

double relax(double theta, double lambda) {
  require_positive(theta, "theta");
  require_positive(lambda, "lambda");
  return lambda * theta;
}

double convex_combination(std::span<const double> thetas, std::span<const double> weights) {
  if (thetas.empty() || thetas.size() != weights.size()) {
    throw ParameterError(fmt::format("convex_combination: {} thetas vs {} weights", thetas.size(), weights.size()));
  }
  double wsum = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    require_positive(thetas[i], "theta");
    require_positive(weights[i], "weight");
    wsum += weights[i];
    theta += weights[i] * thetas[i];
  }
  if (std::abs(wsum - 1.0) > kCalculusTol) {
    throw ParameterError(fmt::format("convex_combination: weights sum to {}, not 1", wsum));
  }
  return theta;
}

double compose2(double theta1, double theta2) {
  require_positive(theta1, "theta1");
  require_positive(theta2, "theta2");
  if (is_one(theta1) && is_one(theta2)) return 1.0;
  const double prod = theta1 * theta2;
  if (!(prod < 1.0)) {
    throw NotCoveredError(fmt::format("composition not covered: theta1*theta2 = {} >= 1 with ({}, {}) not both 1",
                                      prod, theta1, theta2));
  }
  return (theta1 + theta2 - 2.0 * prod) / (1.0 - prod);
}

ScaledConicalCert compose_scaled(const ScaledConicalCert& c1, const ScaledConicalCert& c2) {
  return {c1.omega * c2.omega, compose2(c1.theta, c2.theta)};
}

CompositionResult compose_many(std::span<const double> thetas) {
  if (thetas.size() < 2) throw ParameterError("compose_many needs at least two operators");
  for (const double t : thetas) require_positive(t, "theta");

  const double max_theta = *std::max_element(thetas.begin(), thetas.end());
  const bool any_one = std::any_of(thetas.begin(), thetas.end(), is_one);
  if (any_one) {
    if (max_theta <= 1.0 + kCalculusTol) return {1.0, true};
    throw NotCoveredError("composition not covered: some theta equals 1 while another exceeds 1");
  }

  // s_k = Σ_{i<k} θᵢ/(1−θᵢ); θ/(1−θ) of the composite equals the full sum.
  double s = thetas[0] / (1.0 - thetas[0]);
  for (std::size_t k = 1; k < thetas.size(); ++k) {
    const double bound = 1.0 + 1.0 / s;
    if (!(thetas[k] < bound)) throw ChainConditionError(k + 1, thetas[k], bound);
    s += thetas[k] / (1.0 - thetas[k]);
  }
  return {1.0 / (1.0 + 1.0 / s), false};
}

double firmly_nonexpansive_shift(double lambda) {
  require_positive(lambda, "lambda");
  return lambda / 2.0;
}

}  // namespace conavg
