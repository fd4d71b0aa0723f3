#include <atomic>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "conavg/cli.hpp"
#include "conavg/oracle.hpp"

namespace conavg::cli {
namespace {

std::string num(double v) { return fmt::format("{}", v); }  // shortest round-trip

std::string vec(const Vector& v) {
  std::vector<std::string> parts;
  for (Eigen::Index i = 0; i < v.size(); ++i) parts.push_back(num(v(i)));
  return fmt::format("[{}]", fmt::join(parts, ", "));
}

bool two_step(Algorithm a) { return a != Algorithm::RPP && a != Algorithm::RFB; }

void print_report(const ParamReport& r, std::ostream& out) {
  out << "regime: " << to_string(r.regime) << "\n";
  out << "alpha: " << num(r.alpha) << "\nbeta: " << num(r.beta) << "\n";
  out << "interval_verdict: " << to_string(r.verdict) << "\ndirect_verdict: " << to_string(r.direct) << "\n";
  out << "gamma0: " << num(r.gamma0) << "\nDelta: " << num(r.Delta) << "\n";
  out << "delta_min: " << num(r.delta_min) << "\ndelta_max: " << num(r.delta_max) << "\n";
  out << "lambda: " << num(r.lambda()) << "\nmu: " << num(r.mu()) << "\n";
}

/// Fixed point of T known in closed form: for rPP and rFB, Fix T = zer(A+B).
std::optional<Vector> resolve_reference(const ProblemSpec& spec, const std::optional<Vector>& solution) {
  if (spec.reference) return spec.reference;
  if (!two_step(spec.algorithm)) return solution;
  return std::nullopt;
}

void apply_flags(ProblemSpec& spec, const RunFlags& flags) {
  if (flags.max_iter) spec.max_iter = *flags.max_iter;
  if (flags.tol) {
    if (!(*flags.tol >= 0.0) || !std::isfinite(*flags.tol)) throw SpecError("--tol must be finite and >= 0");
    spec.tol = *flags.tol;
  }
  if (flags.seed) {
    if (auto* r = std::get_if<RandomX0>(&spec.x0)) r->seed = *flags.seed;
  }
}

KmOptions km_options(const ProblemSpec& spec, bool force) {
  KmOptions opt;
  opt.max_iter = spec.max_iter;
  opt.tol = spec.tol;
  opt.solution = resolve_solution(spec);
  opt.reference = resolve_reference(spec, opt.solution);
  opt.enforce_admissible = !force;
  return opt;
}

}  // namespace

void write_trace_csv(const IterationTrace& trace, std::ostream& out) {
  out << "n,residual,fejer_gap,dist_to_solution,rate_stat\n";
  for (const auto& r : trace.records) {
    out << r.n << ',' << num(r.residual) << ',' << (r.fejer_gap ? num(*r.fejer_gap) : "") << ','
        << (r.dist_to_solution ? num(*r.dist_to_solution) : "") << ',' << num(r.rate_stat) << '\n';
  }
}

int cmd_validate(const ProblemSpec& spec, std::ostream& out) {
  out << "algorithm: " << to_string(spec.algorithm) << "\n";
  try {
    const AlgorithmInstance inst = build_instance(spec);
    out << "verdict: feasible\n";
    out << "kappa_star: " << num(inst.kappa_star) << "\n";
    out << "kappa: " << num(inst.kappa) << "\n";
    out << "theta: " << num(inst.cert.theta) << "\n";
    out << "guaranteed: " << (inst.guaranteed ? "true" : "false") << "\n";
    if (inst.report) print_report(*inst.report, out);
    for (const auto& w : inst.warnings) out << "warning: " << w << "\n";
    return kOk;
  } catch (const InfeasibleError& e) {
    out << "verdict: infeasible\nreason: " << e.what() << "\n";
    if (e.report()) print_report(*e.report(), out);
    return kInfeasible;
  } catch (const DimensionError& e) {
    throw SpecError(e.what());
  } catch (const ParameterError& e) {
    out << "verdict: infeasible\nreason: " << e.what() << "\n";
    return kInfeasible;
  }
}

int cmd_run(ProblemSpec spec, const RunFlags& flags, std::ostream& out, std::ostream& err) {
  apply_flags(spec, flags);
  std::ofstream csv;
  if (flags.out) {
    csv.open(*flags.out, std::ios::out | std::ios::trunc);
    if (!csv) {
      err << "error: cannot write " << *flags.out << "\n";
      return kParse;
    }
  }

  AlgorithmInstance inst;
  try {
    inst = build_instance(spec);
  } catch (const DimensionError& e) {
    throw SpecError(e.what());
  } catch (const ParameterError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  }
  if (!inst.guaranteed && !flags.force) {
    err << fmt::format("infeasible: kappa = {} >= kappa* = {}; pass --force to run anyway\n", num(inst.kappa),
                       num(inst.kappa_star));
    return kInfeasible;
  }

  IterationTrace trace;
  try {
    trace = run(inst, resolve_x0(spec), resolve_steps(spec), km_options(spec, flags.force));
  } catch (const DimensionError& e) {
    throw SpecError(e.what());
  } catch (const ParameterError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  }
  for (const auto& w : trace.warnings) err << "warning: " << w << "\n";

  if (csv.is_open()) {
    write_trace_csv(trace, csv);
    csv.flush();
    if (!csv) {
      err << "error: write failed for " << *flags.out << "\n";
      return kParse;
    }
  }

  std::string dist;
  if (!trace.records.empty() && trace.records.back().dist_to_solution) {
    dist = " dist_to_solution=" + num(*trace.records.back().dist_to_solution);
  }
  std::string shadow_text = "n/a";
  if (trace.final_x.allFinite()) shadow_text = vec(shadow(inst, trace.final_x).point);
  out << fmt::format("status={} iterations={} final_residual={}{} shadow={}\n", to_string(trace.status),
                     trace.iterations(), num(trace.final_residual()), dist, shadow_text);
  return trace.status == RunStatus::Diverged ? kDiverged : kOk;
}

GridAxis parse_grid_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw SpecError(fmt::format("grid axis \"{}\": expected name=values", text));
  GridAxis axis{text.substr(0, eq), {}};
  static const std::set<std::string> names{"gamma", "delta", "kappa", "kappa_ratio"};
  if (!names.count(axis.name)) throw SpecError(fmt::format("grid axis: unknown parameter \"{}\"", axis.name));
  const std::string body = text.substr(eq + 1);

  const auto to_double = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty() || !std::isfinite(v)) {
      throw SpecError(fmt::format("grid axis {}: bad number \"{}\"", axis.name, s));
    }
    return v;
  };
  const auto split = [](const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
      if (i == s.size() || s[i] == sep) {
        parts.push_back(s.substr(start, i - start));
        start = i + 1;
      }
    }
    return parts;
  };

  if (body.rfind("linspace:", 0) == 0) {
    const auto parts = split(body.substr(9), ':');
    if (parts.size() != 3) throw SpecError(fmt::format("grid axis {}: expected linspace:lo:hi:count", axis.name));
    const double lo = to_double(parts[0]);
    const double hi = to_double(parts[1]);
    const double count = to_double(parts[2]);
    if (count < 0 || count != std::floor(count)) throw SpecError(fmt::format("grid axis {}: bad count", axis.name));
    const auto n = static_cast<std::size_t>(count);
    for (std::size_t i = 0; i < n; ++i) {
      axis.values.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
  } else if (!body.empty()) {
    for (const auto& p : split(body, ',')) axis.values.push_back(to_double(p));
  }
  return axis;
}

int cmd_sweep(const ProblemSpec& spec, const std::vector<GridAxis>& grid, const RunFlags& flags, std::size_t jobs,
              std::ostream& out, std::ostream& err) {
  if (grid.empty()) throw SpecError("empty grid");
  std::set<std::string> seen;
  std::size_t cells = 1;
  for (const auto& axis : grid) {
    if (!seen.insert(axis.name).second) throw SpecError(fmt::format("grid axis {} given twice", axis.name));
    if (axis.values.empty()) throw SpecError(fmt::format("empty grid (axis {} has no values)", axis.name));
    if (axis.name == "delta" && !two_step(spec.algorithm)) {
      throw SpecError(fmt::format("grid axis delta: not a parameter of {}", to_string(spec.algorithm)));
    }
    cells *= axis.values.size();
  }
  if (seen.count("kappa") && seen.count("kappa_ratio")) throw SpecError("grid: kappa and kappa_ratio are exclusive");

  ProblemSpec base = spec;
  apply_flags(base, flags);

  struct Row {
    ProblemSpec spec;
    bool feasible = false;
    std::optional<double> kappa, kappa_star;
    bool guaranteed = false;
    std::string status;
    std::optional<std::size_t> iterations;
    std::optional<double> residual;
    std::string note;
  };
  std::vector<Row> rows(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    ProblemSpec s = base;
    std::size_t rest = c;
    for (std::size_t a = grid.size(); a-- > 0;) {
      const auto& axis = grid[a];
      const double v = axis.values[rest % axis.values.size()];
      rest /= axis.values.size();
      if (axis.name == "gamma") s.gamma = v;
      if (axis.name == "delta") s.delta = v;
      if (axis.name == "kappa") {
        s.kappa = v;
        s.kappa_ratio.reset();
      }
      if (axis.name == "kappa_ratio") {
        s.kappa_ratio = v;
        s.kappa.reset();
      }
    }
    rows[c].spec = std::move(s);
  }

  const auto evaluate = [&](Row& row) {
    try {
      AlgorithmInstance inst;
      try {
        inst = build_instance(row.spec);
      } catch (const DimensionError&) {
        throw;
      } catch (const ParameterError& e) {
        row.status = "infeasible";
        row.note = e.what();
        return;
      }
      row.feasible = true;
      row.kappa = inst.kappa;
      row.kappa_star = inst.kappa_star;
      row.guaranteed = inst.guaranteed;
      const StepSequence steps = resolve_steps(row.spec);
      if (!flags.force && !steps.in_range(inst.cert.theta)) {
        row.status = "rejected";
        row.note = "step sequence leaves [0, 1/theta]; pass --force to run";
        return;
      }
      const IterationTrace trace = run(inst, resolve_x0(row.spec), steps, km_options(row.spec, flags.force));
      row.status = to_string(trace.status);
      row.iterations = trace.iterations();
      row.residual = trace.final_residual();
    } catch (const std::exception& e) {
      row.status = "error";
      row.note = e.what();
    }
  };

  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, cells);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < cells; i = next++) evaluate(rows[i]);
      });
    }
  }

  std::ofstream file;
  if (flags.out) {
    file.open(*flags.out, std::ios::out | std::ios::trunc);
    if (!file) {
      err << "error: cannot write " << *flags.out << "\n";
      return kParse;
    }
  }
  std::ostream& csv = flags.out ? static_cast<std::ostream&>(file) : out;
  const auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  csv << "cell,gamma,delta,kappa,feasible,kappa_star,guaranteed,status,iterations,final_residual\n";
  for (std::size_t c = 0; c < cells; ++c) {
    const Row& r = rows[c];
    csv << c << ',' << num(r.spec.gamma) << ',' << opt(r.spec.delta) << ','
        << (r.kappa ? num(*r.kappa) : opt(r.spec.kappa)) << ',' << (r.feasible ? "true" : "false") << ','
        << opt(r.kappa_star) << ',' << (r.guaranteed ? "true" : "false") << ',' << r.status << ','
        << (r.iterations ? std::to_string(*r.iterations) : "") << ',' << opt(r.residual) << '\n';
    if (!r.note.empty()) err << "cell " << c << ": " << r.note << "\n";
  }
  csv.flush();
  if (!csv) {
    err << "error: write failed\n";
    return kParse;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

namespace {

void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed,
                std::initializer_list<const char*> required = {}) {
  if (!j.is_object()) throw SpecError(fmt::format("{}: expected an object", where));
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw SpecError(fmt::format("{}: unknown key \"{}\"", where, key));
  }
  for (const char* key : required) {
    if (!j.contains(key)) throw SpecError(fmt::format("{}: missing key \"{}\"", where, key));
  }
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number() || !std::isfinite(j.get<double>())) throw SpecError(fmt::format("{}: expected a finite number", where));
  return j.get<double>();
}

std::uint64_t count(const Json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
    throw SpecError(fmt::format("{}: expected a non-negative integer", where));
  }
  return j.get<std::uint64_t>();
}

Vector vector_of(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw SpecError(fmt::format("{}: expected a non-empty array", where));
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], fmt::format("{}[{}]", where, i));
  return v;
}

Eigen::Index dimension_of(const Json& j) {
  if (!j.contains("dimension")) throw SpecError("missing key \"dimension\"");
  const auto d = count(j["dimension"], "dimension");
  if (d == 0) throw SpecError("dimension: must be >= 1");
  return static_cast<Eigen::Index>(d);
}

void require_dim(std::optional<Eigen::Index> d, Eigen::Index dim, const std::string& where) {
  if (d && *d != dim) throw SpecError(fmt::format("{}: dimension {} != {}", where, *d, dim));
}

oracle::GridOptions grid_options(const Json& j, const std::string& where) {
  oracle::GridOptions g;
  if (j.contains("radius")) g.radius = number(j["radius"], where + ".radius");
  if (j.contains("points")) g.points = count(j["points"], where + ".points");
  return g;
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const DimensionError& e) {
    throw SpecError(e.what());
  } catch (const ParameterError& e) {
    throw SpecError(e.what());
  }
}

}  // namespace

int cmd_certify(const Json& req, std::optional<std::uint64_t> seed, std::size_t jobs, std::ostream& out) {
  check_keys(req, "certify", {"dimension", "target", "theta", "scale", "sampling"}, {"dimension", "target"});
  const Eigen::Index dim = dimension_of(req);

  oracle::SampleConfig cfg;
  cfg.dim = dim;
  cfg.jobs = jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : jobs;
  if (req.contains("sampling")) {
    const Json& s = req["sampling"];
    check_keys(s, "sampling", {"samples", "lo", "hi", "seed", "tol"});
    if (s.contains("samples")) cfg.samples = count(s["samples"], "sampling.samples");
    if (s.contains("lo")) cfg.lo = number(s["lo"], "sampling.lo");
    if (s.contains("hi")) cfg.hi = number(s["hi"], "sampling.hi");
    if (s.contains("seed")) cfg.seed = count(s["seed"], "sampling.seed");
    if (s.contains("tol")) cfg.tol = number(s["tol"], "sampling.tol");
  }
  if (seed) cfg.seed = *seed;
  if (cfg.samples == 0) throw SpecError("sampling.samples: must be >= 1");

  const Json& t = req["target"];
  if (!t.is_object() || !t.contains("kind") || !t["kind"].is_string()) {
    throw SpecError("target: expected an object with a string \"kind\"");
  }
  const std::string kind = t["kind"].get<std::string>();

  oracle::SampleReport report;
  std::optional<double> theta;
  if (req.contains("theta")) theta = number(req["theta"], "theta");

  if (kind == "monotonicity") {
    check_keys(t, "target", {"kind", "operator", "regime", "alpha"}, {"operator", "regime", "alpha"});
    if (theta || req.contains("scale")) throw SpecError("target monotonicity: takes alpha, not theta/scale");
    const OperatorSpec op = operator_from_json(t["operator"], "target.operator");
    require_dim(op.dimension(), dim, "target.operator");
    if (!t["regime"].is_string()) throw SpecError("target.regime: expected \"monotone\" or \"comonotone\"");
    const std::string regime = t["regime"].get<std::string>();
    if (regime != "monotone" && regime != "comonotone") {
      throw SpecError("target.regime: expected \"monotone\" or \"comonotone\"");
    }
    const double alpha = number(t["alpha"], "target.alpha");
    report = guarded([&] {
      return oracle::sample_monotonicity_check(
          op, alpha, regime == "monotone" ? MonotonicityKind::Monotone : MonotonicityKind::Comonotone, cfg);
    });
    out << "claim: " << regime << " alpha=" << num(alpha) << "\n";
  } else {
    Map T;
    if (kind == "linear") {
      check_keys(t, "target", {"kind", "M", "b"}, {"M"});
      const Json& mj = t["M"];
      if (!mj.is_array() || static_cast<Eigen::Index>(mj.size()) != dim) {
        throw SpecError(fmt::format("target.M: expected {} rows", dim));
      }
      Matrix M(dim, dim);
      for (Eigen::Index r = 0; r < dim; ++r) {
        const Vector row = vector_of(mj[static_cast<std::size_t>(r)], fmt::format("target.M[{}]", r));
        if (row.size() != dim) throw SpecError(fmt::format("target.M[{}]: expected {} entries", r, dim));
        M.row(r) = row.transpose();
      }
      Vector b = Vector::Zero(dim);
      if (t.contains("b")) b = vector_of(t["b"], "target.b");
      if (b.size() != dim) throw SpecError("target.b: dimension mismatch");
      T = [M, b](const Vector& x) -> Vector { return M * x + b; };
    } else if (kind == "resolvent") {
      check_keys(t, "target", {"kind", "operator", "gamma", "lambda"}, {"operator", "gamma"});
      const OperatorSpec op = operator_from_json(t["operator"], "target.operator");
      require_dim(op.dimension(), dim, "target.operator");
      const double gamma = number(t["gamma"], "target.gamma");
      const double lambda = t.contains("lambda") ? number(t["lambda"], "target.lambda") : 1.0;
      const Resolvent J = guarded([&] { return Resolvent(op, gamma); });
      T = [J, lambda](const Vector& x) -> Vector { return (1.0 - lambda) * x + lambda * J(x); };
    } else if (kind == "prox") {
      check_keys(t, "target", {"kind", "function", "gamma"}, {"function", "gamma"});
      const FunctionSpec f = function_from_json(t["function"], "target.function");
      require_dim(f.dimension(), dim, "target.function");
      const double gamma = number(t["gamma"], "target.gamma");
      guarded([&] {
        check_prox_precondition(f, gamma);
        return 0;
      });
      T = [f, gamma](const Vector& x) -> Vector { return prox(f, gamma, x); };
    } else if (kind == "forward_step") {
      check_keys(t, "target", {"kind", "operator", "gamma"}, {"operator", "gamma"});
      const OperatorSpec op = operator_from_json(t["operator"], "target.operator");
      require_dim(op.dimension(), dim, "target.operator");
      if (!op.pointwise_evaluable()) throw SpecError("target.operator: not pointwise-evaluable");
      const double gamma = number(t["gamma"], "target.gamma");
      T = [op, gamma](const Vector& x) -> Vector { return x - gamma * evaluate(op, x); };
    } else if (kind == "algorithm") {
      check_keys(t, "target", {"kind", "problem"}, {"problem"});
      const ProblemSpec p = parse_problem(t["problem"]);
      if (p.dimension != dim) throw SpecError("target.problem: dimension mismatch");
      const AlgorithmInstance inst = guarded([&] { return build_instance(p); });
      if (!theta) theta = inst.cert.theta;
      T = inst.map;
    } else {
      throw SpecError(fmt::format("target: unknown kind \"{}\"", kind));
    }
    if (!theta) throw SpecError("missing key \"theta\"");
    double scale = 1.0;
    if (req.contains("scale")) scale = number(req["scale"], "scale");
    if (scale != 1.0) T = [T, scale](const Vector& x) -> Vector { return scale * T(x); };
    report = guarded([&] { return oracle::sample_conical_check(T, *theta, cfg); });
    out << "claim: conical theta=" << num(*theta);
    if (scale != 1.0) out << " scale=" << num(scale);
    out << "\n";
    out << "forms_agree: " << (report.forms_agree ? "true" : "false") << "\n";
  }

  out << "verdict: " << (report.pass ? "pass" : "fail") << "\n";
  out << "samples: " << report.n_samples << "\n";
  out << "worst_slack: " << num(report.worst_slack) << "\n";
  if (report.witness) {
    out << "witness_x: " << vec(report.witness->x) << "\n";
    out << "witness_y: " << vec(report.witness->y) << "\n";
  }
  return report.pass ? kOk : kCertFail;
}

int cmd_oracle(const Json& req, std::ostream& out) {
  if (!req.is_object() || !req.contains("query") || !req["query"].is_string()) {
    throw SpecError("oracle: expected an object with a string \"query\"");
  }
  const std::string query = req["query"].get<std::string>();
  if (query == "brute_prox") {
    check_keys(req, "oracle", {"query", "function", "gamma", "x", "radius", "points"}, {"function", "gamma", "x"});
    const FunctionSpec f = function_from_json(req["function"], "function");
    const double gamma = number(req["gamma"], "gamma");
    const Vector x = vector_of(req["x"], "x");
    require_dim(f.dimension(), x.size(), "function");
    const Vector p = guarded([&] { return oracle::brute_prox(f, gamma, x, grid_options(req, "oracle")); });
    out << "brute_prox: " << vec(p) << "\n";
    return kOk;
  }
  if (query == "analytic_zero") {
    check_keys(req, "oracle", {"query", "dimension", "A", "B"}, {"dimension", "A"});
    const Eigen::Index dim = dimension_of(req);
    const OperatorSpec A = operator_from_json(req["A"], "A");
    std::optional<OperatorSpec> B;
    if (req.contains("B")) B = operator_from_json(req["B"], "B");
    const auto z = guarded([&] { return oracle::analytic_zero(A, B ? &*B : nullptr, dim); });
    out << "analytic_zero: " << (z ? vec(*z) : "unknown") << "\n";
    return kOk;
  }
  if (query == "grid_argmin") {
    check_keys(req, "oracle", {"query", "dimension", "f", "g", "radius", "points"}, {"dimension", "f", "g"});
    const Eigen::Index dim = dimension_of(req);
    const FunctionSpec f = function_from_json(req["f"], "f");
    const FunctionSpec g = function_from_json(req["g"], "g");
    require_dim(f.dimension(), dim, "f");
    require_dim(g.dimension(), dim, "g");
    const Vector z = guarded([&] { return oracle::grid_argmin(f, g, dim, grid_options(req, "oracle")); });
    out << "grid_argmin: " << vec(z) << "\n";
    return kOk;
  }
  throw SpecError(fmt::format("oracle: unknown query \"{}\"", query));
}

}  // namespace conavg::cli
