// stablepc: generate test problems, run solver experiments, check criteria.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stablepc/errors.hpp"
#include "stablepc/experiments/config.hpp"
#include "stablepc/experiments/criteria.hpp"
#include "stablepc/experiments/io.hpp"
#include "stablepc/experiments/runner.hpp"

namespace fs = std::filesystem;
using namespace stablepc;
using namespace stablepc::experiments;

namespace {

enum ExitCode { kOk = 0, kFailed = 1, kUsage = 2, kIo = 3 };

struct Options {
  std::optional<std::string> config;
  std::optional<std::string> experiment;
  std::optional<std::size_t> n;
  std::optional<double> kappa_a;
  std::optional<double> kappa_ap;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<std::string>> solvers;
  std::optional<std::size_t> check_freq;
  std::optional<std::size_t> max_iters;
  std::optional<std::string> out;
  std::optional<std::string> data;
  std::optional<std::string> from;
  bool no_measure = false;
};

void add_problem_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "TOML experiment config");
  cmd->add_option("--experiment", o.experiment, "preset name")
      ->check(CLI::IsMember(experiment_names()));
  cmd->add_option("--n", o.n, "problem dimension");
  cmd->add_option("--kappa-a", o.kappa_a, "condition number of A");
  cmd->add_option("--kappa-ap", o.kappa_ap, "condition number of the preconditioned matrix");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--data", o.data, "LIBSVM file replacing synthetic kernel points");
}

void add_solver_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--solvers", o.solvers, "comma-separated solver list")
      ->delimiter(',')
      ->check(CLI::IsMember(solver_names()));
  cmd->add_option("--check-freq", o.check_freq, "berr check frequency f");
  cmd->add_option("--max-iters", o.max_iters, "iteration budget for every solver");
  cmd->add_option("--from", o.from, "solve problems written by `gen` in this directory");
}

ExperimentConfig resolve(const Options& o) {
  ExperimentConfig cfg;
  if (o.config) {
    cfg = load_config(*o.config);
    if (o.experiment && experiment_from_string(*o.experiment) != cfg.experiment) {
      throw InvalidSpec("--experiment conflicts with the experiment named in --config");
    }
  } else {
    cfg = preset(o.experiment ? experiment_from_string(*o.experiment) : Experiment::custom);
  }
  Overrides ov;
  ov.n = o.n;
  ov.kappa_a = o.kappa_a;
  ov.kappa_pre = o.kappa_ap;
  ov.seed = o.seed;
  ov.solvers = o.solvers;
  ov.check_freq = o.check_freq;
  ov.max_iters = o.max_iters;
  ov.out = o.out;
  ov.data = o.data;
  apply(cfg, ov);
  validate(cfg);
  return cfg;
}

int cmd_gen(const Options& o) {
  const ExperimentConfig cfg = resolve(o);
  const std::vector<NamedInstance> cases = build_cases(cfg);
  const std::vector<fs::path> dirs = problem_dirs(cfg.out, cases);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    write_problem(dirs[i], cases[i], !o.no_measure);
    std::cout << "wrote " << dirs[i].string() << '\n';
  }
  return kOk;
}

int cmd_solve(const Options& o) {
  const ExperimentConfig cfg = resolve(o);
  const std::vector<NamedInstance> cases = o.from ? read_problems(*o.from) : build_cases(cfg);
  const ExperimentOutput out = run_experiment(cfg, cases);
  write_output(cfg.out, out);
  std::cout << summary_table(out);
  return all_targets_met(out) ? kOk : kFailed;
}

int cmd_verify(const Options& o) {
  const fs::path dir = o.out ? *o.out : o.experiment ? *o.experiment : "out";
  const ExperimentOutput out = read_output(dir);
  const std::vector<CriterionResult> results = evaluate(out);
  if (results.empty()) {
    std::cout << "no criteria defined for experiment '" << to_string(out.config.experiment) << "'\n";
    return kOk;
  }
  bool all = true;
  for (const CriterionResult& r : results) {
    std::cout << format_result(r) << '\n';
    all = all && r.passed;
  }
  return all ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preconditioned Krylov solver experiments"};
  app.require_subcommand(1);
  Options o;

  CLI::App* gen = app.add_subcommand("gen", "write a generated problem as Matrix Market files");
  add_problem_options(gen, o);
  gen->add_flag("--no-measure", o.no_measure, "skip the dense condition number measurements");

  CLI::App* solve = app.add_subcommand("solve", "run solvers and write CSV histories");
  add_problem_options(solve, o);
  add_solver_options(solve, o);

  CLI::App* verify = app.add_subcommand("verify", "check acceptance criteria on solve outputs");
  verify->add_option("--out", o.out, "directory written by `solve`");
  verify->add_option("--experiment", o.experiment, "preset name (default output directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(o);
    if (solve->parsed()) return cmd_solve(o);
    return cmd_verify(o);
  } catch (const InvalidSpec& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
}
