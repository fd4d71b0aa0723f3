#include <iostream>

#include <CLI11.hpp>

#include "conavg/cli.hpp"

using namespace conavg::cli;

int main(int argc, char** argv) {
  CLI::App app{"Conically averaged operators: parameter validation, splitting runs and sampling certificates"};
  app.require_subcommand(1);

  std::string spec_path;
  RunFlags flags;
  std::size_t jobs = 0;
  std::vector<std::string> grid_text;

  auto add_spec = [&](CLI::App* sub) { sub->add_option("--spec", spec_path, "JSON input")->required(); };
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--seed", flags.seed, "seed for a random x0");
    sub->add_flag("--force", flags.force, "run configurations outside the certified range");
    sub->add_option("--max-iter", flags.max_iter, "iteration cap");
    sub->add_option("--tol", flags.tol, "residual tolerance");
  };

  auto* validate = app.add_subcommand("validate", "check parameter hypotheses and print kappa*");
  add_spec(validate);

  auto* run = app.add_subcommand("run", "run the iteration and write a trace CSV");
  add_spec(run);
  run->add_option("--out", flags.out, "trace CSV path")->required();
  add_run_flags(run);

  auto* sweep = app.add_subcommand("sweep", "run a parameter grid and write a summary CSV");
  add_spec(sweep);
  sweep->add_option("--out", flags.out, "summary CSV path (stdout when absent)");
  sweep->add_option("--grid", grid_text, "name=v1,v2,... or name=linspace:lo:hi:count")->required();
  sweep->add_option("--jobs", jobs, "worker threads (0: all cores)");
  add_run_flags(sweep);

  auto* certify = app.add_subcommand("certify", "sample a conical or monotonicity claim");
  add_spec(certify);
  certify->add_option("--seed", flags.seed, "sampling seed");
  certify->add_option("--jobs", jobs, "worker threads (0: all cores)");

  auto* oracle = app.add_subcommand("oracle", "brute-force prox, analytic zero or grid argmin");
  add_spec(oracle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  try {
    if (*validate) return cmd_validate(load_problem(spec_path), std::cout);
    if (*run) return cmd_run(load_problem(spec_path), flags, std::cout, std::cerr);
    if (*sweep) {
      std::vector<GridAxis> grid;
      for (const auto& text : grid_text) grid.push_back(parse_grid_axis(text));
      return cmd_sweep(load_problem(spec_path), grid, flags, jobs, std::cout, std::cerr);
    }
    if (*certify) return cmd_certify(read_json(spec_path), flags.seed, jobs, std::cout);
    if (*oracle) return cmd_oracle(read_json(spec_path), std::cout);
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  }
  return kParse;
}
