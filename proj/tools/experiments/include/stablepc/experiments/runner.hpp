#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "stablepc/experiments/config.hpp"
#include "stablepc/history.hpp"
#include "stablepc/problems.hpp"

namespace stablepc::experiments {

inline constexpr double kUnitRoundoff = 0x1.0p-53;

/// One CSV row. `residual` is the oracle-measured ‖b − Ax‖ when the row was
/// measured and the solver's own estimate otherwise.
struct Row {
  std::size_t iteration = 0;
  double residual = 0.0;
  std::optional<double> berr;
  std::optional<double> forward_error;
  Event event = Event::none;

  friend bool operator==(const Row&, const Row&) = default;
};

struct RunSummary {
  std::string case_name;  // empty for single-instance experiments
  std::string solver;
  Status status = Status::max_iters;
  std::size_t iterations = 0;
  std::size_t refinements = 0;
  std::optional<double> final_berr;
  std::optional<double> final_forward_error;
  double final_residual = 0.0;
  MatvecCounts counts;
  std::optional<double> target_berr;
  bool met_target = true;

  /// File stem: solver, or case-solver.
  std::string id() const;
};

struct Run {
  RunSummary summary;
  std::vector<Row> rows;
};

struct CaseInfo {
  std::string name;
  ProblemMeta meta;
  double norm_a = 0.0;
  double norm_b = 0.0;
};

struct NamedInstance {
  std::string name;
  ProblemInstance instance;
};

struct ExperimentOutput {
  ExperimentConfig config;
  std::vector<CaseInfo> cases;
  std::vector<Run> runs;

  /// nullptr when the run is absent.
  const Run* find(const std::string& case_name, const std::string& solver) const;
  const CaseInfo* find_case(const std::string& name) const;
};

/// Builds the problem instance(s) of an experiment. Only the trio generator
/// yields more than one (cluster_ill, spread_well, cluster_well).
std::vector<NamedInstance> build_cases(const ExperimentConfig& cfg);

/// Berr the named solver is expected to reach on an n×n system, if any.
std::optional<double> target_berr(const std::string& solver, std::size_t n);

/// Runs one solver with oracle measurements every `measure_every` iterations.
/// Throws InvalidSpec if the solver does not fit the instance's preconditioner side.
Run run_solver(const NamedInstance& c, const SolverSpec& spec, std::size_t measure_every);

/// Every configured solver on every case.
ExperimentOutput run_experiment(const ExperimentConfig& cfg,
                                const std::vector<NamedInstance>& cases);
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

/// True when every run met its target and none reported no_progress.
bool all_targets_met(const ExperimentOutput& out);

std::vector<Row> rows_from_history(const ConvergenceHistory& history);

}  // namespace stablepc::experiments
