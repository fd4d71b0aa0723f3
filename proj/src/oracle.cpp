#include "conavg/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include <fmt/format.h>

namespace conavg::oracle {

namespace {

constexpr std::size_t kBatch = 1024;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Vector draw(CounterRng& rng, const SampleConfig& cfg) {
  Vector v(cfg.dim);
  for (Eigen::Index i = 0; i < cfg.dim; ++i) v(i) = rng.uniform(cfg.lo, cfg.hi);
  return v;
}

// One evaluated pair: normalized slack for the primary (and optional
// alternative) form.
struct PairSlack {
  double primary;
  double alt;
};

// Runs `eval(rng)` over the configured sample count in fixed batches, one RNG
// stream per batch, and reduces in batch order.
template <class Eval>
SampleReport sample(const SampleConfig& cfg, Eval eval) {
  if (cfg.dim < 1) throw ParameterError("sampling dimension must be >= 1");
  if (!(cfg.lo < cfg.hi)) throw ParameterError("sampling box needs lo < hi");
  const std::size_t batches = (cfg.samples + kBatch - 1) / kBatch;
  std::vector<SampleReport> partial(batches);

  auto run_batch = [&](std::size_t b) {
    CounterRng rng(cfg.seed, b);
    const std::size_t count = std::min(kBatch, cfg.samples - b * kBatch);
    SampleReport rep;
    rep.n_samples = count;
    rep.worst_slack = std::numeric_limits<double>::infinity();
    rep.worst_slack_alt = std::numeric_limits<double>::infinity();
    std::optional<Witness> worst;
    for (std::size_t k = 0; k < count; ++k) {
      Vector x = draw(rng, cfg);
      Vector y = draw(rng, cfg);
      const PairSlack s = eval(x, y);
      if (s.primary < rep.worst_slack) {
        rep.worst_slack = s.primary;
        worst = Witness{std::move(x), std::move(y)};
      }
      rep.worst_slack_alt = std::min(rep.worst_slack_alt, s.alt);
    }
    const bool pass_primary = rep.worst_slack >= -cfg.tol;
    const bool pass_alt = rep.worst_slack_alt >= -cfg.tol;
    rep.pass = pass_primary && pass_alt;
    rep.forms_agree = pass_primary == pass_alt;
    if (!rep.pass) rep.witness = std::move(worst);
    partial[b] = std::move(rep);
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, batches));
  if (jobs == 1) {
    for (std::size_t b = 0; b < batches; ++b) run_batch(b);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (std::size_t j = 0; j < jobs; ++j) {
      workers.emplace_back([&] {
        for (std::size_t b = next++; b < batches; b = next++) run_batch(b);
      });
    }
  }

  SampleReport out;
  out.worst_slack = std::numeric_limits<double>::infinity();
  out.worst_slack_alt = std::numeric_limits<double>::infinity();
  for (const auto& p : partial) out = merge(out, p);
  return out;
}

double golden_section(const std::function<double(double)>& phi, double a, double b, double width) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = phi(c);
  double fd = phi(d);
  while (b - a > width) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = phi(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = phi(d);
    }
  }
  return 0.5 * (a + b);
}

// Coarse grid over [center − radius, center + radius], then golden section
// on the two cells around the best grid point. Widens once when the best
// point sits on the grid boundary.
double minimize_1d(const std::function<double(double)>& phi, double center, double radius, const GridOptions& opt) {
  if (opt.points < 3) throw ParameterError("grid needs at least 3 points");
  for (int attempt = 0; attempt < 2; ++attempt) {
    const double lo = center - radius;
    const double step = 2.0 * radius / static_cast<double>(opt.points - 1);
    std::size_t best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < opt.points; ++k) {
      const double v = phi(lo + step * static_cast<double>(k));
      if (v < best_val) {
        best_val = v;
        best = k;
      }
    }
    if (best == 0 || best + 1 == opt.points || !std::isfinite(best_val)) {
      radius *= 10.0;
      continue;
    }
    const double a = lo + step * static_cast<double>(best - 1);
    const double b = lo + step * static_cast<double>(best + 1);
    return golden_section(phi, a, b, opt.width);
  }
  throw ParameterError("1-D minimizer lies on the grid boundary after widening");
}

struct DiagonalPart {
  Vector q;  // curvature per coordinate
  Vector b;  // linear term per coordinate
};

// Affine-type operator as (M, b) on the given dimension.
std::optional<std::pair<Matrix, Vector>> linear_part(const OperatorSpec& op, Eigen::Index dim) {
  if (const auto* a = op.get_if<AffineOp>()) return std::pair{a->M, a->b};
  if (const auto* s = op.get_if<ScaledIdentityOp>()) {
    return std::pair{Matrix(s->a * Matrix::Identity(dim, dim)), Vector(Vector::Zero(dim))};
  }
  if (const auto* g = op.get_if<GradQuadraticOp>()) return std::pair{g->Q, g->c};
  if (const auto* d = op.get_if<SubdifferentialOp>()) {
    if (const auto* q = d->f.get_if<QuadraticFn>()) return std::pair{q->Q, q->b};
  }
  return std::nullopt;
}

bool is_diagonal(const Matrix& M) {
  return (M - Matrix(M.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
}

std::optional<Vector> separable_zero(const FunctionSpec& f, const DiagonalPart& lin) {
  const Eigen::Index n = lin.q.size();
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double q = lin.q(i);
    double b = lin.b(i);
    if (const auto* l1 = f.get_if<L1Fn>()) {
      if (!(q > 0.0)) return std::nullopt;
      z(i) = std::copysign(std::max(std::abs(b / q) - l1->w / q, 0.0), -b);
    } else if (const auto* wl = f.get_if<WeaklyConvexL1Fn>()) {
      q -= wl->rho;
      if (!(q > 0.0)) return std::nullopt;
      z(i) = std::copysign(std::max(std::abs(b / q) - wl->w / q, 0.0), -b);
    } else if (const auto* box = f.get_if<BoxIndicatorFn>()) {
      if (!(q > 0.0)) return std::nullopt;
      z(i) = std::clamp(-b / q, box->lo(i), box->hi(i));
    } else {
      return std::nullopt;
    }
  }
  return z;
}

}  // namespace

// ---------------------------------------------------------------------------

std::uint64_t CounterRng::next_u64() {
  return splitmix64(splitmix64(seed_ ^ splitmix64(stream_ + 0x632be59bd9b4e019ULL)) + counter_++);
}

double CounterRng::uniform(double lo, double hi) {
  const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

SampleReport merge(const SampleReport& a, const SampleReport& b) {
  SampleReport out;
  out.n_samples = a.n_samples + b.n_samples;
  const bool take_b = b.worst_slack < a.worst_slack;
  out.worst_slack = take_b ? b.worst_slack : a.worst_slack;
  out.worst_slack_alt = std::min(a.worst_slack_alt, b.worst_slack_alt);
  out.pass = a.pass && b.pass;
  out.forms_agree = a.forms_agree && b.forms_agree;
  if (!out.pass) out.witness = take_b ? (b.witness ? b.witness : a.witness) : (a.witness ? a.witness : b.witness);
  return out;
}

SampleReport sample_conical_check(const Map& T, double theta, const SampleConfig& config) {
  if (!(theta > 0.0)) throw ParameterError("theta must be > 0");
  const double ratio = (1.0 - theta) / theta;
  return sample(config, [&](const Vector& x, const Vector& y) -> PairSlack {
    const Vector Tx = T(x);
    const Vector Ty = T(y);
    const Vector d = x - y;
    const Vector e = Tx - Ty;
    const double dd = d.squaredNorm();
    const double ee = e.squaredNorm();
    const double rr = (d - e).squaredNorm();
    const double scale = 1.0 + std::max({dd, ee, std::abs(ratio) * rr});
    const double slack = dd - ratio * rr - ee;
    const double slack_alt = 2.0 * (1.0 - theta) * d.dot(e) - ee - (1.0 - 2.0 * theta) * dd;
    return {slack / scale, slack_alt / (theta * scale)};
  });
}

SampleReport sample_monotonicity_check(const OperatorSpec& op, double alpha, MonotonicityKind kind,
                                       const SampleConfig& config) {
  Map value;
  Map point;
  if (op.pointwise_evaluable()) {
    value = [&op](const Vector& x) { return evaluate(op, x); };
    point = [](const Vector& x) { return x; };
  } else {
    const FunctionSpec& f = op.get_if<SubdifferentialOp>()->f;
    const double a = f.alpha_convex();
    const double gamma = a < 0.0 ? 0.5 / -a : 1.0;
    // (p, (z − p)/γ) ∈ gra ∂̂f with p = Prox_{γf} z.
    value = [&f, gamma](const Vector& z) -> Vector { return (z - prox(f, gamma, z)) / gamma; };
    point = [&f, gamma](const Vector& z) -> Vector { return prox(f, gamma, z); };
  }
  return sample(config, [&](const Vector& x, const Vector& y) -> PairSlack {
    const Vector d = point(x) - point(y);
    const Vector du = value(x) - value(y);
    const double dd = d.squaredNorm();
    const double uu = du.squaredNorm();
    const double ip = d.dot(du);
    const double slack = kind == MonotonicityKind::Monotone ? ip - alpha * dd : ip - alpha * uu;
    const double s = slack / (1.0 + dd + uu);
    return {s, s};
  });
}

// ---------------------------------------------------------------------------

bool is_separable(const FunctionSpec& f) {
  if (const auto* q = f.get_if<QuadraticFn>()) return is_diagonal(q->Q);
  return true;
}

double component_value(const FunctionSpec& f, Eigen::Index i, double z) {
  if (const auto* q = f.get_if<QuadraticFn>()) {
    if (!is_diagonal(q->Q)) throw ParameterError("quadratic with non-diagonal Q is not separable");
    return 0.5 * q->Q(i, i) * z * z + q->b(i) * z;
  }
  if (const auto* l1 = f.get_if<L1Fn>()) return l1->w * std::abs(z);
  if (const auto* wl = f.get_if<WeaklyConvexL1Fn>()) return wl->w * std::abs(z) - 0.5 * wl->rho * z * z;
  const auto* box = f.get_if<BoxIndicatorFn>();
  return (z >= box->lo(i) && z <= box->hi(i)) ? 0.0 : std::numeric_limits<double>::infinity();
}

Vector brute_prox(const FunctionSpec& f, double gamma, const Vector& x, GridOptions options) {
  if (!is_separable(f)) throw ParameterError("brute_prox needs a separable function");
  check_prox_precondition(f, gamma);
  if (auto d = f.dimension(); d && *d != x.size()) throw DimensionError("brute_prox: dimension mismatch");
  const double curvature = 1.0 + gamma * std::min(f.alpha_convex(), 0.0);
  Vector z(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x(i);
    auto phi = [&](double t) { return component_value(f, i, t) + (t - xi) * (t - xi) / (2.0 * gamma); };
    const double radius = options.radius > 0.0 ? options.radius : 10.0 * (1.0 + std::abs(xi)) / curvature;
    z(i) = minimize_1d(phi, xi, radius, options);
  }
  return z;
}

Vector grid_argmin(const FunctionSpec& f, const FunctionSpec& g, Eigen::Index dim, GridOptions options) {
  if (!is_separable(f) || !is_separable(g)) throw ParameterError("grid_argmin needs separable functions");
  for (const auto* h : {&f, &g}) {
    if (auto d = h->dimension(); d && *d != dim) throw DimensionError("grid_argmin: dimension mismatch");
  }
  const double radius = options.radius > 0.0 ? options.radius : 100.0;
  Vector z(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    auto phi = [&](double t) { return component_value(f, i, t) + component_value(g, i, t); };
    z(i) = minimize_1d(phi, 0.0, radius, options);
  }
  return z;
}

std::optional<Vector> analytic_zero(const OperatorSpec& A, const OperatorSpec* B, Eigen::Index dim) {
  const OperatorSpec* ops[2] = {&A, B};
  for (const auto* op : ops) {
    if (op && op->dimension() && *op->dimension() != dim) throw DimensionError("analytic_zero: dimension mismatch");
  }

  auto la = linear_part(A, dim);
  auto lb = B ? linear_part(*B, dim) : std::optional{std::pair{Matrix(Matrix::Zero(dim, dim)), Vector(Vector::Zero(dim))}};

  if (la && lb) {
    const Matrix M = la->first + lb->first;
    const Vector b = la->second + lb->second;
    Eigen::FullPivLU<Matrix> lu(M);
    if (!lu.isInvertible()) return std::nullopt;
    return Vector(lu.solve(-b));
  }

  // One nonsmooth separable term plus a diagonal linear part.
  const OperatorSpec* nonsmooth = la ? B : &A;
  const auto& lin = la ? la : lb;
  if (!nonsmooth || !lin || !is_diagonal(lin->first)) return std::nullopt;
  const auto* sub = nonsmooth->get_if<SubdifferentialOp>();
  if (!sub) return std::nullopt;
  return separable_zero(sub->f, DiagonalPart{lin->first.diagonal(), lin->second});
}

// ---------------------------------------------------------------------------

RateReport rate_check(const IterationTrace& trace, std::size_t burn_in, const RateOptions& options) {
  if (trace.records.empty() || trace.records.size() <= burn_in) {
    throw ParameterError(fmt::format("trace too short: {} records, burn-in {}", trace.records.size(), burn_in));
  }
  if (options.checkpoints.empty()) throw ParameterError("rate_check needs checkpoints");
  const std::size_t N = trace.iterations();
  const bool converged = trace.status == RunStatus::Converged;
  if (N < options.checkpoints.front() && !converged) {
    throw ParameterError(fmt::format("trace too short: {} iterations before checkpoint {}", N,
                                     options.checkpoints.front()));
  }

  RateReport rep;
  for (std::size_t n = burn_in + 1; n <= N; ++n) {
    const double prev = trace.records[n - 1].residual;
    if (trace.records[n].residual > prev * (1.0 + 1e-12)) {
      rep.residual_monotone = false;
      break;
    }
  }

  // prefix[n] = min_{1≤m≤n} √m·r_m, with prefix[0] = 0.
  std::vector<double> prefix(N + 1, 0.0);
  double running = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m <= N; ++m) {
    running = std::min(running, std::sqrt(static_cast<double>(m)) * trace.records[m].residual);
    prefix[m] = running;
  }

  const double x_norm = trace.final_x.size() > 0 ? trace.final_x.norm() : 0.0;
  const double floor = std::max(trace.tol, options.relative_floor * (1.0 + x_norm));
  for (const std::size_t n : options.checkpoints) {
    if (n <= N) {
      const double v = prefix[n];
      rep.checkpoints.push_back({n, v, v <= std::sqrt(static_cast<double>(n)) * floor});
    } else if (converged) {
      rep.checkpoints.push_back({n, prefix[N], true});
    }
  }

  const bool all_resolved =
      std::all_of(rep.checkpoints.begin(), rep.checkpoints.end(), [](const auto& c) { return c.resolved; });
  if (rep.checkpoints.size() < 2 && !all_resolved) {
    throw ParameterError("trace too short: fewer than two checkpoints to compare");
  }
  rep.pass = true;
  for (std::size_t k = 1; k < rep.checkpoints.size(); ++k) {
    const auto& prev = rep.checkpoints[k - 1];
    const auto& cur = rep.checkpoints[k];
    if (!(cur.value < prev.value) && !cur.resolved) rep.pass = false;
  }
  if (rep.checkpoints.size() == 1) rep.pass = rep.checkpoints.front().resolved;
  return rep;
}

std::optional<std::vector<std::size_t>> find_admissible_order(std::span<const double> thetas) {
  if (thetas.size() > 8) throw ParameterError(fmt::format("find_admissible_order: m = {} > 8", thetas.size()));
  if (thetas.size() < 2) throw ParameterError("find_admissible_order needs at least two certificates");
  for (const double t : thetas) {
    if (!(t > 0.0)) throw ParameterError("theta must be > 0");
    if (std::abs(t - 1.0) <= kCalculusTol) throw ParameterError("find_admissible_order needs every theta != 1");
  }
  std::vector<std::size_t> order(thetas.size());
  std::iota(order.begin(), order.end(), 0);
  do {
    double s = thetas[order[0]] / (1.0 - thetas[order[0]]);
    bool ok = true;
    for (std::size_t k = 1; k < order.size() && ok; ++k) {
      const double t = thetas[order[k]];
      ok = t < 1.0 + 1.0 / s;
      s += t / (1.0 - t);
    }
    if (ok) return order;
  } while (std::next_permutation(order.begin(), order.end()));
  return std::nullopt;
}

}  // namespace conavg::oracle
