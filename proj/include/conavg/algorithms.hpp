#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "conavg/calculus.hpp"
#include "conavg/operators.hpp"
#include "conavg/resolvents.hpp"

namespace conavg {

// ---------------------------------------------------------------------------
// Krasnosel'skii-Mann engine

/// Relaxation sequence λₙ for x_{n+1} = (1−λₙ)xₙ + λₙTxₙ. Only families whose
/// divergence condition Σ λₙ(1−θλₙ) = ∞ is known in closed form are offered.
class StepSequence {
 public:
  enum class Kind { Constant, HarmonicTail };

  static StepSequence constant(double lambda);
  /// λₙ = (1/θ)(1 − c/(n+1)), c ∈ (0, 1].
  static StepSequence harmonic_tail(double c);

  Kind kind() const { return kind_; }
  double parameter() const { return value_; }
  double at(std::size_t n, double theta) const;

  /// Every λₙ lies in [0, 1/θ].
  bool in_range(double theta) const;
  /// Σ λₙ(1−θλₙ) = ∞ (and the rate hypothesis liminf λₙ(1−θλₙ) > 0 for Constant).
  bool divergent_sum(double theta) const;

 private:
  StepSequence(Kind k, double v) : kind_(k), value_(v) {}
  Kind kind_;
  double value_;
};

enum class RunStatus { Converged, MaxIter, Diverged };
const char* to_string(RunStatus status);

struct IterationRecord {
  std::size_t n = 0;
  double residual = 0.0;                   // ‖xₙ − Txₙ‖
  std::optional<double> fejer_gap;         // ‖xₙ₊₁−x̄‖ − ‖xₙ−x̄‖
  std::optional<double> dist_to_solution;  // ‖shadow(xₙ) − x*‖
  double rate_stat = 0.0;                  // √n·rₙ
  std::optional<Vector> x;                 // snapshot, stride-controlled
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  RunStatus status = RunStatus::MaxIter;
  Vector final_x;
  double tol = 0.0;
  std::vector<std::string> warnings;

  std::size_t iterations() const { return records.empty() ? 0 : records.back().n; }
  double final_residual() const { return records.empty() ? 0.0 : records.back().residual; }
};

struct KmOptions {
  std::size_t max_iter = 100000;
  double tol = 1e-8;
  /// Known fixed point x̄ of T, for the Fejér gap.
  std::optional<Vector> reference;
  /// Known solution x*, compared against shadow(xₙ) (or xₙ when shadow is empty).
  std::optional<Vector> solution;
  Map shadow;
  /// Keep every k-th iterate in the trace; 0 keeps none.
  std::size_t snapshot_stride = 0;
  /// Reject step sequences leaving [0, 1/θ]. Turned off only to probe
  /// uncertified regimes on purpose.
  bool enforce_admissible = true;
  double divergence_bound = 1e12;
};

IterationTrace km_run(const Map& T, double theta, const Vector& x0, const StepSequence& steps,
                      const KmOptions& options = {});

// ---------------------------------------------------------------------------
// Parameter validation for the adaptive Douglas-Rachford operator

enum class Feasibility { Strict, Boundary, Infeasible };
const char* to_string(Feasibility f);

/// Relative tolerance that separates "boundary" from strict/infeasible.
inline constexpr double kBoundaryTol = 1e-9;

struct ParamReport {
  MonotonicityKind regime = MonotonicityKind::Comonotone;
  double alpha = 0, beta = 0, gamma = 0, delta = 0;

  /// Verdict of the interval form (threshold γ₀ plus admissible interval).
  Feasibility verdict = Feasibility::Infeasible;
  /// Verdict of the direct quadratic inequality.
  Feasibility direct = Feasibility::Infeasible;
  double lhs = 0, rhs = 0;  // of the direct inequality

  double gamma0 = 0;
  double Delta = 0;
  /// γ > γ₀ (comonotone) or 1/γ > γ₀ (monotone).
  bool gamma_ok = false;
  /// Interval for δ (comonotone) or for 1/δ (monotone), before intersecting with (0, ∞).
  double lower = 0, upper = 0;
  /// Admissible δ range in δ coordinates; delta_max may be +inf.
  double delta_min = 0, delta_max = 0;
  /// γ+α > 0 and δ+β > 0 (comonotone) or 1+γα > 0 and 1+δβ > 0 (monotone).
  bool implied_positive = false;

  double lambda() const { return 1.0 + delta / gamma; }
  double mu() const { return 1.0 + gamma / delta; }
};

/// Comonotone regime: (γ+δ)² ≤ 4(γ+α)(δ+β) ⇔ γ > γ₀ and δ ∈ [γ+2α ∓ 2√Δ].
ParamReport validate_params_comonotone(double alpha, double beta, double gamma, double delta);
/// Monotone regime: (γ+δ)² ≤ 4γδ(1+γα)(1+δβ), via the reciprocal substitution.
ParamReport validate_params_monotone(double alpha, double beta, double gamma, double delta);

/// 0 if α ≥ 0, else 2β − 2√(β(α+β)).
double gamma_threshold(double alpha, double beta);

/// Midpoint of the admissible δ range for the given γ (the unique δ when
/// α+β = 0); nullopt when γ admits none.
std::optional<double> suggest_delta(MonotonicityKind regime, double alpha, double beta, double gamma);

// ---------------------------------------------------------------------------
// Algorithm instances

enum class AlgorithmKind { RPP, RFB, ADRComonotone, ADRMonotone };
const char* to_string(AlgorithmKind kind);

/// Parameters outside the governing theorem's hypotheses. Carries the aDR
/// diagnostics when they apply.
class InfeasibleError : public ParameterError {
 public:
  explicit InfeasibleError(const std::string& what, std::optional<ParamReport> report = std::nullopt)
      : ParameterError(what), report_(std::move(report)) {}
  const std::optional<ParamReport>& report() const { return report_; }

 private:
  std::optional<ParamReport> report_;
};

struct AlgorithmInstance {
  AlgorithmKind kind = AlgorithmKind::RPP;
  double gamma = 0;
  std::optional<double> delta;
  double kappa = 0;
  std::optional<double> lambda;  // aDR relaxations, λ = 1+δ/γ
  std::optional<double> mu;      // μ = 1+γ/δ
  double kappa_star = 0;
  /// Certificate of the full iteration map: θ = κ/κ*.
  ConicalCert cert{1.0};
  /// κ < κ*: convergence is certified for λₙ ≡ 1.
  bool guaranteed = false;
  /// aDR only: T_{B,A} instead of T_{A,B}.
  bool swapped = false;
  std::optional<ParamReport> report;
  std::vector<std::string> warnings;

  Map map;           // T
  Map solution_map;  // fixed point ↦ candidate solution

  Vector apply(const Vector& x) const { return map(x); }
};

double kappa_star_rpp(double alpha, double gamma);
/// Throws InfeasibleError outside both admissible cases.
double kappa_star_rfb(double alpha, double beta, double gamma);
double kappa_star_adr(MonotonicityKind regime, double alpha, double beta, double gamma, double delta);

/// T_PP = (1−κ)Id + κJ_{γA} for maximally α-comonotone A, γ > max{0, −α}.
AlgorithmInstance build_rpp(const OperatorSpec& A, double gamma, double kappa);

/// T_FB = (1−κ)Id + κJ_{γA}(Id − γB) for α-comonotone A and β-cocoercive B.
AlgorithmInstance build_rfb(const OperatorSpec& A, const OperatorSpec& B, double gamma, double kappa);

/// T = (1−κ)Id + κR₂R₁ (R₁R₂ when swapped) with λ = 1+δ/γ, μ = 1+γ/δ.
AlgorithmInstance build_adr(const OperatorSpec& A, const OperatorSpec& B, double gamma, double delta, double kappa,
                            MonotonicityKind regime, bool swapped = false);

/// aDR on ∂̂f, ∂̂g (monotone regime); the solution map is Prox_{γf} (Prox_{δg} when swapped).
AlgorithmInstance convex_min_instance(const FunctionSpec& f, const FunctionSpec& g, double gamma, double delta,
                                      double kappa, bool swapped = false);

struct ShadowPoint {
  Vector point;
  double fixed_point_residual;  // ‖x̄ − Tx̄‖
};

ShadowPoint shadow(const AlgorithmInstance& instance, const Vector& fixed_point);

/// km_run on instance.map with θ = κ/κ*, dist measured through the solution map.
IterationTrace run(const AlgorithmInstance& instance, const Vector& x0, const StepSequence& steps,
                   KmOptions options = {});

}  // namespace conavg
