#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "conavg/algorithms.hpp"

namespace conavg::cli {

using Json = nlohmann::json;

/// Malformed or schema-violating input (exit code 1).
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kOk = 0, kParse = 1, kInfeasible = 2, kDiverged = 3, kCertFail = 4 };

enum class Algorithm { RPP, RFB, ADRComonotone, ADRMonotone, ConvexMin };
const char* to_string(Algorithm a);

struct RandomX0 {
  std::uint64_t seed = 0;
  double scale = 1.0;
};

struct HarmonicTail {
  double c = 1.0;
};

struct ProblemSpec {
  Eigen::Index dimension = 1;
  Algorithm algorithm = Algorithm::RPP;
  std::optional<OperatorSpec> A, B;
  std::optional<FunctionSpec> f, g;
  double gamma = 0;
  std::optional<double> delta;
  std::optional<double> kappa;
  std::optional<double> kappa_ratio;  // κ = ratio·κ*
  std::variant<double, HarmonicTail> lambda_step = 1.0;
  bool swap = false;
  std::variant<Vector, RandomX0> x0 = RandomX0{};
  double tol = 1e-8;
  std::size_t max_iter = 100000;
  std::optional<Vector> solution;   // overrides the analytic solution
  std::optional<Vector> reference;  // known fixed point, for the Fejér gap
};

Json function_to_json(const FunctionSpec& f);
Json operator_to_json(const OperatorSpec& op);
FunctionSpec function_from_json(const Json& j, const std::string& where);
OperatorSpec operator_from_json(const Json& j, const std::string& where);

/// Strict parse: unknown keys, wrong types and non-finite numbers are errors.
ProblemSpec parse_problem(const Json& j);
ProblemSpec load_problem(const std::string& path);
Json to_json(const ProblemSpec& spec);

/// Builds the instance; κ = kappa_ratio·κ* when the ratio is given.
AlgorithmInstance build_instance(const ProblemSpec& spec);
Vector resolve_x0(const ProblemSpec& spec);
StepSequence resolve_steps(const ProblemSpec& spec);
/// Spec override, else the analytic zero (grid argmin for separable f + g).
std::optional<Vector> resolve_solution(const ProblemSpec& spec);

struct RunFlags {
  bool force = false;
  std::optional<std::size_t> max_iter;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;  // replaces the x0 random seed
  std::optional<std::string> out;
};

/// One sweep axis: parameter name (gamma, delta, kappa, kappa_ratio) and values.
struct GridAxis {
  std::string name;
  std::vector<double> values;
};

/// "name=v1,v2,..." or "name=linspace:lo:hi:count".
GridAxis parse_grid_axis(const std::string& text);

void write_trace_csv(const IterationTrace& trace, std::ostream& out);

int cmd_validate(const ProblemSpec& spec, std::ostream& out);
int cmd_run(ProblemSpec spec, const RunFlags& flags, std::ostream& out, std::ostream& err);
int cmd_sweep(const ProblemSpec& spec, const std::vector<GridAxis>& grid, const RunFlags& flags, std::size_t jobs,
              std::ostream& out, std::ostream& err);
int cmd_certify(const Json& request, std::optional<std::uint64_t> seed, std::size_t jobs, std::ostream& out);
int cmd_oracle(const Json& request, std::ostream& out);

/// Reads and parses a JSON file; SpecError on I/O or syntax failure.
Json read_json(const std::string& path);

}  // namespace conavg::cli
