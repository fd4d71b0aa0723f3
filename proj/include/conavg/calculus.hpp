#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>

#include "conavg/hilbert.hpp"

namespace conavg {

/// Claim that a map T is conically θ-averaged: T = (1−θ)Id + θN with N
/// nonexpansive. θ = 1 nonexpansive, θ < 1 averaged, θ > 1 over-relaxed.
struct ConicalCert {
  double theta;

  explicit ConicalCert(double t);
};

/// Claim that ω·T is conically θ-averaged.
struct ScaledConicalCert {
  double omega;
  double theta;

  ScaledConicalCert(double w, double t);
};

/// The composition/chain rule has no certificate for these inputs.
class NotCoveredError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

/// Chain condition θ_k < 1 + 1/Σ_{i<k} θᵢ/(1−θᵢ) fails at 1-based position k.
class ChainConditionError : public NotCoveredError {
 public:
  ChainConditionError(std::size_t k, double theta_k, double bound);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

inline constexpr double kCalculusTol = 1e-12;

/// (1−λ)Id + λT for T conically θ-averaged: λθ.
double relax(double theta, double lambda);

/// Σ ωᵢθᵢ; weights positive and summing to 1 within 1e-12.
double convex_combination(std::span<const double> thetas, std::span<const double> weights);

/// 1 when θ1 = θ2 = 1, else (θ1+θ2−2θ1θ2)/(1−θ1θ2) which needs θ1θ2 < 1.
double compose2(double theta1, double theta2);

/// ω = ω1ω2, θ = compose2(θ1, θ2); valid for both orders of the product.
ScaledConicalCert compose_scaled(const ScaledConicalCert& c1, const ScaledConicalCert& c2);

struct CompositionResult {
  double theta;
  /// Every θᵢ ≤ 1 with some equal to 1: only nonexpansiveness is certified.
  bool nonexpansive_only;
};

/// Certificate of T_m ∘ … ∘ T_1 (scalings with product 1 allowed). The chain
/// condition is checked in the given order only.
CompositionResult compose_many(std::span<const double> thetas);

/// Id − λT for firmly nonexpansive T: λ/2.
double firmly_nonexpansive_shift(double lambda);

}  // namespace conavg
