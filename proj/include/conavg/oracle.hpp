#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "conavg/algorithms.hpp"
#include "conavg/operators.hpp"
#include "conavg/resolvents.hpp"

namespace conavg::oracle {

/// Counter-based generator: the k-th draw of stream s under seed is a pure
/// function of (seed, s, k), so batches can be drawn independently.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

struct SampleConfig {
  Eigen::Index dim = 1;
  double lo = -10.0;
  double hi = 10.0;
  std::size_t samples = 10000;
  /// A sample fails when slack < −tol·(1 + max compared squared norm).
  double tol = 1e-9;
  std::uint64_t seed = 0;
  /// Worker threads; the result does not depend on it.
  std::size_t jobs = 1;
};

struct Witness {
  Vector x;
  Vector y;
};

struct SampleReport {
  std::size_t n_samples = 0;
  /// Worst normalized slack (slack / scale) over all pairs.
  double worst_slack = 0.0;
  std::optional<Witness> witness;  // present iff !pass
  bool pass = true;
  /// Conical check only: both equivalent inequality forms gave the same verdict.
  bool forms_agree = true;
  double worst_slack_alt = 0.0;
};

/// ‖Tx−Ty‖² ≤ ‖x−y‖² − ((1−θ)/θ)‖(x−Tx)−(y−Ty)‖², cross-checked against
/// ‖Tx−Ty‖² + (1−2θ)‖x−y‖² ≤ 2(1−θ)⟨x−y, Tx−Ty⟩.
SampleReport sample_conical_check(const Map& T, double theta, const SampleConfig& config);

/// Defining inequality of α-(co)monotonicity on sampled graph pairs. A
/// subdifferential is sampled through prox: (p, (z−p)/γ) with p = Prox_{γf}z.
SampleReport sample_monotonicity_check(const OperatorSpec& op, double alpha, MonotonicityKind kind,
                                       const SampleConfig& config);

/// Merge two reports over disjoint samples (worst-slack reduction).
SampleReport merge(const SampleReport& a, const SampleReport& b);

// ---------------------------------------------------------------------------

struct GridOptions {
  double radius = 0.0;  // 0: pick from the data
  std::size_t points = 10000;
  double width = 1e-8;  // golden-section stopping width
};

/// True when f is a sum of 1-D terms (diagonal quadratic, l1, weakly convex l1, box).
bool is_separable(const FunctionSpec& f);

/// i-th 1-D term of a separable f.
double component_value(const FunctionSpec& f, Eigen::Index i, double z);

/// Componentwise grid + golden-section minimization of f(z) + ‖z−x‖²/(2γ).
Vector brute_prox(const FunctionSpec& f, double gamma, const Vector& x, GridOptions options = {});

/// Componentwise grid + golden-section argmin of f + g over [center ± radius]ⁿ
/// (radius defaults to 100).
Vector grid_argmin(const FunctionSpec& f, const FunctionSpec& g, Eigen::Index dim, GridOptions options = {});

/// Closed-form zero of A (+ B): linear solve for affine-type operators, exact
/// componentwise formulas for a separable subdifferential plus a diagonal
/// positive quadratic gradient. nullopt means "unknown".
std::optional<Vector> analytic_zero(const OperatorSpec& A, const OperatorSpec* B, Eigen::Index dim);

// ---------------------------------------------------------------------------

struct RateCheckpoint {
  std::size_t n;
  double value;    // min_{1≤m≤n} √m·r_m
  bool resolved;   // at the precision floor (or past the end of a converged trace)
};

struct RateReport {
  bool residual_monotone = true;  // rₙ nonincreasing after burn-in
  std::vector<RateCheckpoint> checkpoints;
  bool pass = false;
};

struct RateOptions {
  std::vector<std::size_t> checkpoints{100, 1000, 10000};
  /// Residual floor relative to 1 + ‖x_final‖; the trace tolerance also counts.
  double relative_floor = 1e-13;
};

/// Pass iff the checkpoint statistic strictly decreases, except where it has
/// already reached the floor. Throws when the trace is too short to judge.
RateReport rate_check(const IterationTrace& trace, std::size_t burn_in, const RateOptions& options = {});

/// Brute force over orderings of at most 8 certificates for one that meets
/// the chain condition at every position.
std::optional<std::vector<std::size_t>> find_admissible_order(std::span<const double> thetas);

}  // namespace conavg::oracle
