#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "conavg/cli.hpp"
#include "conavg/oracle.hpp"

namespace conavg::cli {
namespace {

void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed,
                std::initializer_list<const char*> required = {}) {
  if (!j.is_object()) throw SpecError(fmt::format("{}: expected an object", where));
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw SpecError(fmt::format("{}: unknown key \"{}\"", where, key));
  }
  for (const char* key : required) {
    if (!j.contains(key)) throw SpecError(fmt::format("{}: missing key \"{}\"", where, key));
  }
}

double get_number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw SpecError(fmt::format("{}: expected a number", where));
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SpecError(fmt::format("{}: not finite", where));
  return v;
}

std::uint64_t get_u64(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw SpecError(fmt::format("{}: expected a non-negative integer", where));
  }
  return j.get<std::uint64_t>();
}

Vector get_vector(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw SpecError(fmt::format("{}: expected a non-empty array of numbers", where));
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_number(j[i], fmt::format("{}[{}]", where, i));
  return v;
}

Matrix get_matrix(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw SpecError(fmt::format("{}: expected a non-empty array of rows", where));
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Matrix M;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vector row = get_vector(j[static_cast<std::size_t>(r)], fmt::format("{}[{}]", where, r));
    if (cols < 0) {
      cols = row.size();
      M.resize(rows, cols);
    } else if (row.size() != cols) {
      throw SpecError(fmt::format("{}: ragged rows", where));
    }
    M.row(r) = row.transpose();
  }
  return M;
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json matrix_json(const Matrix& M) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) a.push_back(vector_json(M.row(r).transpose()));
  return a;
}

std::string get_string(const Json& j, const std::string& where) {
  if (!j.is_string()) throw SpecError(fmt::format("{}: expected a string", where));
  return j.get<std::string>();
}

template <class F>
auto wrap(const std::string& where, F&& build) {
  try {
    return build();
  } catch (const DimensionError& e) {
    throw SpecError(fmt::format("{}: {}", where, e.what()));
  } catch (const ParameterError& e) {
    throw SpecError(fmt::format("{}: {}", where, e.what()));
  }
}

const std::pair<Algorithm, const char*> kAlgorithmNames[] = {
    {Algorithm::RPP, "rpp"},
    {Algorithm::RFB, "rfb"},
    {Algorithm::ADRComonotone, "adr_comonotone"},
    {Algorithm::ADRMonotone, "adr_monotone"},
    {Algorithm::ConvexMin, "convex_min"},
};

}  // namespace

const char* to_string(Algorithm a) {
  for (const auto& [value, name] : kAlgorithmNames) {
    if (value == a) return name;
  }
  return "?";
}

FunctionSpec function_from_json(const Json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("type")) throw SpecError(fmt::format("{}: expected an object with \"type\"", where));
  const std::string type = get_string(j["type"], where + ".type");
  if (type == "quadratic") {
    check_keys(j, where, {"type", "Q", "b"}, {"Q", "b"});
    Matrix Q = get_matrix(j["Q"], where + ".Q");
    Vector b = get_vector(j["b"], where + ".b");
    return wrap(where, [&] { return FunctionSpec::quadratic(std::move(Q), std::move(b)); });
  }
  if (type == "l1") {
    check_keys(j, where, {"type", "w"}, {"w"});
    const double w = get_number(j["w"], where + ".w");
    return wrap(where, [&] { return FunctionSpec::l1(w); });
  }
  if (type == "weakly_convex_l1") {
    check_keys(j, where, {"type", "w", "rho"}, {"w", "rho"});
    const double w = get_number(j["w"], where + ".w");
    const double rho = get_number(j["rho"], where + ".rho");
    return wrap(where, [&] { return FunctionSpec::weakly_convex_l1(w, rho); });
  }
  if (type == "box") {
    check_keys(j, where, {"type", "lo", "hi"}, {"lo", "hi"});
    Vector lo = get_vector(j["lo"], where + ".lo");
    Vector hi = get_vector(j["hi"], where + ".hi");
    return wrap(where, [&] { return FunctionSpec::box_indicator(std::move(lo), std::move(hi)); });
  }
  throw SpecError(fmt::format("{}: unknown function type \"{}\"", where, type));
}

OperatorSpec operator_from_json(const Json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("type")) throw SpecError(fmt::format("{}: expected an object with \"type\"", where));
  const std::string type = get_string(j["type"], where + ".type");
  if (type == "affine") {
    check_keys(j, where, {"type", "M", "b"}, {"M", "b"});
    Matrix M = get_matrix(j["M"], where + ".M");
    Vector b = get_vector(j["b"], where + ".b");
    return wrap(where, [&] { return OperatorSpec::affine(std::move(M), std::move(b)); });
  }
  if (type == "scaled_identity") {
    check_keys(j, where, {"type", "a"}, {"a"});
    const double a = get_number(j["a"], where + ".a");
    return wrap(where, [&] { return OperatorSpec::scaled_identity(a); });
  }
  if (type == "grad_quadratic") {
    check_keys(j, where, {"type", "Q", "c"}, {"Q", "c"});
    Matrix Q = get_matrix(j["Q"], where + ".Q");
    Vector c = get_vector(j["c"], where + ".c");
    return wrap(where, [&] { return OperatorSpec::grad_quadratic(std::move(Q), std::move(c)); });
  }
  if (type == "subdifferential") {
    check_keys(j, where, {"type", "f"}, {"f"});
    FunctionSpec f = function_from_json(j["f"], where + ".f");
    return wrap(where, [&] { return OperatorSpec::subdifferential(std::move(f)); });
  }
  throw SpecError(fmt::format("{}: unknown operator type \"{}\"", where, type));
}

Json function_to_json(const FunctionSpec& f) {
  if (const auto* q = f.get_if<QuadraticFn>()) return {{"type", "quadratic"}, {"Q", matrix_json(q->Q)}, {"b", vector_json(q->b)}};
  if (const auto* l = f.get_if<L1Fn>()) return {{"type", "l1"}, {"w", l->w}};
  if (const auto* w = f.get_if<WeaklyConvexL1Fn>()) return {{"type", "weakly_convex_l1"}, {"w", w->w}, {"rho", w->rho}};
  const auto& b = *f.get_if<BoxIndicatorFn>();
  return {{"type", "box"}, {"lo", vector_json(b.lo)}, {"hi", vector_json(b.hi)}};
}

Json operator_to_json(const OperatorSpec& op) {
  if (const auto* a = op.get_if<AffineOp>()) return {{"type", "affine"}, {"M", matrix_json(a->M)}, {"b", vector_json(a->b)}};
  if (const auto* s = op.get_if<ScaledIdentityOp>()) return {{"type", "scaled_identity"}, {"a", s->a}};
  if (const auto* g = op.get_if<GradQuadraticOp>()) {
    return {{"type", "grad_quadratic"}, {"Q", matrix_json(g->Q)}, {"c", vector_json(g->c)}};
  }
  return {{"type", "subdifferential"}, {"f", function_to_json(op.get_if<SubdifferentialOp>()->f)}};
}

ProblemSpec parse_problem(const Json& j) {
  check_keys(j, "spec",
             {"dimension", "algorithm", "operators", "functions", "params", "swap", "x0", "tol", "max_iter", "solution",
              "reference"},
             {"dimension", "algorithm", "params"});
  ProblemSpec s;
  const std::uint64_t dim = get_u64(j["dimension"], "dimension");
  if (dim == 0) throw SpecError("dimension: must be >= 1");
  s.dimension = static_cast<Eigen::Index>(dim);

  const std::string alg = get_string(j["algorithm"], "algorithm");
  bool found = false;
  for (const auto& [value, name] : kAlgorithmNames) {
    if (alg == name) {
      s.algorithm = value;
      found = true;
    }
  }
  if (!found) throw SpecError(fmt::format("algorithm: unknown kind \"{}\"", alg));

  const auto check_dim = [&](std::optional<Eigen::Index> d, const std::string& where) {
    if (d && *d != s.dimension) throw SpecError(fmt::format("{}: dimension {} != {}", where, *d, s.dimension));
  };

  if (s.algorithm == Algorithm::ConvexMin) {
    if (j.contains("operators")) throw SpecError("operators: not used by convex_min (give functions)");
    if (!j.contains("functions")) throw SpecError("spec: missing key \"functions\"");
    const Json& fj = j["functions"];
    check_keys(fj, "functions", {"f", "g"}, {"f", "g"});
    s.f = function_from_json(fj["f"], "functions.f");
    s.g = function_from_json(fj["g"], "functions.g");
    check_dim(s.f->dimension(), "functions.f");
    check_dim(s.g->dimension(), "functions.g");
  } else {
    if (j.contains("functions")) throw SpecError("functions: only used by convex_min (give operators)");
    if (!j.contains("operators")) throw SpecError("spec: missing key \"operators\"");
    const Json& oj = j["operators"];
    if (s.algorithm == Algorithm::RPP) {
      check_keys(oj, "operators", {"A"}, {"A"});
    } else {
      check_keys(oj, "operators", {"A", "B"}, {"A", "B"});
    }
    s.A = operator_from_json(oj["A"], "operators.A");
    check_dim(s.A->dimension(), "operators.A");
    if (oj.contains("B")) {
      s.B = operator_from_json(oj["B"], "operators.B");
      check_dim(s.B->dimension(), "operators.B");
    }
  }

  const Json& pj = j["params"];
  const bool two_step = s.algorithm != Algorithm::RPP && s.algorithm != Algorithm::RFB;
  if (two_step) {
    check_keys(pj, "params", {"gamma", "delta", "kappa", "kappa_ratio", "lambda_step"}, {"gamma", "delta"});
    s.delta = get_number(pj["delta"], "params.delta");
  } else {
    check_keys(pj, "params", {"gamma", "kappa", "kappa_ratio", "lambda_step"}, {"gamma"});
  }
  s.gamma = get_number(pj["gamma"], "params.gamma");
  if (pj.contains("kappa") == pj.contains("kappa_ratio")) {
    throw SpecError("params: give exactly one of \"kappa\" and \"kappa_ratio\"");
  }
  if (pj.contains("kappa")) s.kappa = get_number(pj["kappa"], "params.kappa");
  if (pj.contains("kappa_ratio")) s.kappa_ratio = get_number(pj["kappa_ratio"], "params.kappa_ratio");
  if (pj.contains("lambda_step")) {
    const Json& lj = pj["lambda_step"];
    if (lj.is_object()) {
      check_keys(lj, "params.lambda_step", {"harmonic_tail"}, {"harmonic_tail"});
      s.lambda_step = HarmonicTail{get_number(lj["harmonic_tail"], "params.lambda_step.harmonic_tail")};
    } else {
      s.lambda_step = get_number(lj, "params.lambda_step");
    }
  }

  if (j.contains("swap")) {
    if (!j["swap"].is_boolean()) throw SpecError("swap: expected true or false");
    if (!two_step) throw SpecError("swap: only meaningful for the Douglas-Rachford kinds");
    s.swap = j["swap"].get<bool>();
  }

  if (j.contains("x0")) {
    const Json& xj = j["x0"];
    if (xj.is_object()) {
      check_keys(xj, "x0", {"random"}, {"random"});
      const Json& rj = xj["random"];
      check_keys(rj, "x0.random", {"seed", "scale"}, {"seed", "scale"});
      RandomX0 r{get_u64(rj["seed"], "x0.random.seed"), get_number(rj["scale"], "x0.random.scale")};
      if (!(r.scale > 0.0)) throw SpecError("x0.random.scale: must be > 0");
      s.x0 = r;
    } else {
      Vector x0 = get_vector(xj, "x0");
      check_dim(x0.size(), "x0");
      s.x0 = std::move(x0);
    }
  }
  if (j.contains("tol")) {
    s.tol = get_number(j["tol"], "tol");
    if (s.tol < 0.0) throw SpecError("tol: must be >= 0");
  }
  if (j.contains("max_iter")) s.max_iter = get_u64(j["max_iter"], "max_iter");
  if (j.contains("solution")) {
    s.solution = get_vector(j["solution"], "solution");
    check_dim(s.solution->size(), "solution");
  }
  if (j.contains("reference")) {
    s.reference = get_vector(j["reference"], "reference");
    check_dim(s.reference->size(), "reference");
  }
  return s;
}

Json to_json(const ProblemSpec& s) {
  Json j;
  j["dimension"] = s.dimension;
  j["algorithm"] = to_string(s.algorithm);
  if (s.A) j["operators"]["A"] = operator_to_json(*s.A);
  if (s.B) j["operators"]["B"] = operator_to_json(*s.B);
  if (s.f) j["functions"]["f"] = function_to_json(*s.f);
  if (s.g) j["functions"]["g"] = function_to_json(*s.g);
  Json p;
  p["gamma"] = s.gamma;
  if (s.delta) p["delta"] = *s.delta;
  if (s.kappa) p["kappa"] = *s.kappa;
  if (s.kappa_ratio) p["kappa_ratio"] = *s.kappa_ratio;
  if (const auto* h = std::get_if<HarmonicTail>(&s.lambda_step)) {
    p["lambda_step"] = {{"harmonic_tail", h->c}};
  } else {
    p["lambda_step"] = std::get<double>(s.lambda_step);
  }
  j["params"] = p;
  if (s.swap) j["swap"] = true;
  if (const auto* r = std::get_if<RandomX0>(&s.x0)) {
    j["x0"] = {{"random", {{"seed", r->seed}, {"scale", r->scale}}}};
  } else {
    j["x0"] = vector_json(std::get<Vector>(s.x0));
  }
  j["tol"] = s.tol;
  j["max_iter"] = s.max_iter;
  if (s.solution) j["solution"] = vector_json(*s.solution);
  if (s.reference) j["reference"] = vector_json(*s.reference);
  return j;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError(fmt::format("cannot open {}", path));
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw SpecError(fmt::format("{}: {}", path, e.what()));
  }
}

ProblemSpec load_problem(const std::string& path) { return parse_problem(read_json(path)); }

AlgorithmInstance build_instance(const ProblemSpec& s) {
  const auto build = [&](double kappa) {
    switch (s.algorithm) {
      case Algorithm::RPP:
        return build_rpp(*s.A, s.gamma, kappa);
      case Algorithm::RFB:
        return build_rfb(*s.A, *s.B, s.gamma, kappa);
      case Algorithm::ADRComonotone:
        return build_adr(*s.A, *s.B, s.gamma, *s.delta, kappa, MonotonicityKind::Comonotone, s.swap);
      case Algorithm::ADRMonotone:
        return build_adr(*s.A, *s.B, s.gamma, *s.delta, kappa, MonotonicityKind::Monotone, s.swap);
      case Algorithm::ConvexMin:
        return convex_min_instance(*s.f, *s.g, s.gamma, *s.delta, kappa, s.swap);
    }
    throw SpecError("unknown algorithm");
  };
  if (s.kappa) return build(*s.kappa);
  const double kappa_star = build(1.0).kappa_star;
  return build(*s.kappa_ratio * kappa_star);
}

Vector resolve_x0(const ProblemSpec& s) {
  if (const auto* v = std::get_if<Vector>(&s.x0)) return *v;
  const auto& r = std::get<RandomX0>(s.x0);
  oracle::CounterRng rng(r.seed, 0);
  Vector x(s.dimension);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(-r.scale, r.scale);
  return x;
}

StepSequence resolve_steps(const ProblemSpec& s) {
  if (const auto* h = std::get_if<HarmonicTail>(&s.lambda_step)) return StepSequence::harmonic_tail(h->c);
  return StepSequence::constant(std::get<double>(s.lambda_step));
}

std::optional<Vector> resolve_solution(const ProblemSpec& s) {
  if (s.solution) return s.solution;
  if (s.algorithm == Algorithm::ConvexMin) {
    const OperatorSpec df = OperatorSpec::subdifferential(*s.f);
    const OperatorSpec dg = OperatorSpec::subdifferential(*s.g);
    if (auto z = oracle::analytic_zero(df, &dg, s.dimension)) return z;
    if (oracle::is_separable(*s.f) && oracle::is_separable(*s.g)) return oracle::grid_argmin(*s.f, *s.g, s.dimension);
    return std::nullopt;
  }
  return oracle::analytic_zero(*s.A, s.B ? &*s.B : nullptr, s.dimension);
}

}  // namespace conavg::cli
