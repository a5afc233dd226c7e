#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "stratgn/stratgn.hpp"

namespace {

using namespace stratgn;

constexpr int kExitInput = 3;
constexpr int kExitNumerical = 4;

struct Options {
  std::string problem;
  std::string point;
  std::string out;
  std::string trace;
  SolverConfig config;
};

void add_config_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--tol", o.config.tol, "stationarity tolerance");
  cmd->add_option("--delta", o.config.delta, "initial correction radius");
  cmd->add_option("--eta", o.config.eta, "Armijo parameter in (0.5, 1)");
  cmd->add_option("--rho", o.config.rho, "backtracking factor in (0, 1)");
  cmd->add_option("--max-iter", o.config.max_iter, "outer iteration limit");
  cmd->add_option("--jmax", o.config.j_max, "backtracking limit");
  cmd->add_option("--mu-min", o.config.mu_min, "lower LM damping clamp");
  cmd->add_option("--mu-max", o.config.mu_max, "upper LM damping clamp");
  cmd->add_option("--zero-tol", o.config.zero_tol,
                  "relative zero-eigenvalue tolerance");
  cmd->add_option("--seed", o.config.seed, "random seed");
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError(path, "cannot write file");
  }
  out << text;
}

PrimalDualPoint start_point(const Options& o, const NlsdpProblem& problem) {
  if (o.point.empty()) {
    return PrimalDualPoint::zero(problem.num_vars(), problem.order());
  }
  return load_point(o.point, problem.num_vars(), problem.order());
}

RegularityOptions regularity_options(const SolverConfig& c) {
  RegularityOptions r;
  r.zero_tol_factor = c.zero_tol;
  r.seed = c.seed;
  return r;
}

int run_solve(const Options& o) {
  o.config.validate();
  const auto problem = load_problem(o.problem);
  const PrimalDualPoint z0 = start_point(o, *problem);
  const SolveResult r = sgn_solve(*problem, z0, o.config);
  write_text(o.out, result_to_json(r, o.config).dump(2) + "\n");
  if (!o.trace.empty()) {
    std::ostringstream csv;
    write_trace_csv(csv, r.trace);
    write_text(o.trace, csv.str());
  }
  switch (r.status) {
    case SolveStatus::kConverged:
      return 0;
    case SolveStatus::kMaxIter:
      return 1;
    case SolveStatus::kStalled:
      return 2;
  }
  return 2;
}

int run_diagnose(const Options& o) {
  o.config.validate();
  const auto problem = load_problem(o.problem);
  const PrimalDualPoint z = load_point(o.point, problem->num_vars(), problem->order());
  const RegularityReport report = diagnose(*problem, z, regularity_options(o.config));
  write_text(o.out, report_to_json(report).dump(2) + "\n");
  return 0;
}

Json demo_run(const ProblemFixture& fx, const PrimalDualPoint& z0,
              const SolverConfig& config) {
  const SolveResult r = sgn_solve(*fx.problem, z0, config);
  return Json{{"status", to_string(r.status)},
              {"phi", r.phi},
              {"iterations", r.iterations},
              {"distance", distance(r.z, fx.point)}};
}

int run_demo(const Options& o) {
  o.config.validate();
  Json doc{{"version", kVersion}};

  const ProblemFixture wr = weakly_regular_example();
  doc["weakly_regular"] = {
      {"diagnose", report_to_json(diagnose(*wr.problem, wr.point,
                                           regularity_options(o.config)))},
      {"solve", demo_run(wr, PrimalDualPoint::zero(5, 4), o.config)}};

  const ProblemFixture syn = synth_nondegenerate(o.config.seed, 5, 8);
  PrimalDualPoint start = syn.point;
  start.x.array() += 0.05;
  doc["synthetic"] = {
      {"diagnose", report_to_json(diagnose(*syn.problem, syn.point,
                                           regularity_options(o.config)))},
      {"solve", demo_run(syn, start, o.config)}};

  write_text(o.out, doc.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stratified Gauss-Newton solver for nonlinear SDPs"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Options o;
  auto* solve = app.add_subcommand("solve", "run the solver on a problem file");
  solve->add_option("problem", o.problem, "problem file")->required();
  solve->add_option("--point", o.point, "start point file (default x=0, y=0)");
  solve->add_option("--out", o.out, "result document (default stdout)");
  solve->add_option("--trace", o.trace, "CSV trace");
  add_config_flags(solve, o);

  auto* diag = app.add_subcommand("diagnose", "regularity report at a point");
  diag->add_option("problem", o.problem, "problem file")->required();
  diag->add_option("--point", o.point, "point file")->required();
  diag->add_option("--out", o.out, "report document (default stdout)");
  add_config_flags(diag, o);

  auto* demo = app.add_subcommand("demo", "run the built-in fixtures");
  demo->add_option("--out", o.out, "summary document (default stdout)");
  add_config_flags(demo, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*solve) {
      return run_solve(o);
    }
    if (*diag) {
      return run_diagnose(o);
    }
    return run_demo(o);
  } catch (const InputError& e) {
    std::cerr << "stratgn: input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "stratgn: " << e.what() << '\n';
    return kExitNumerical;
  }
}
