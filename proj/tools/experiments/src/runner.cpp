#include "stablepc/experiments/runner.hpp"

#include <algorithm>
#include <cmath>

#include "stablepc/errors.hpp"
#include "stablepc/libsvm.hpp"
#include "stablepc/linalg.hpp"
#include "stablepc/metrics.hpp"
#include "stablepc/rng.hpp"
#include "stablepc/solvers.hpp"

namespace stablepc::experiments {

namespace {

constexpr std::uint64_t kPointsStream = 11;

bool one_of(const std::string& s, std::initializer_list<const char*> names) {
  return std::any_of(names.begin(), names.end(), [&](const char* n) { return s == n; });
}

void require_side(const std::string& solver, Side side, std::initializer_list<Side> allowed) {
  if (std::find(allowed.begin(), allowed.end(), side) == allowed.end()) {
    throw InvalidSpec("solver '" + solver + "' does not apply to a " + std::string(to_string(side)) +
                      "-preconditioned instance");
  }
}

SolverConfig refinement_config(const SolverSpec& spec, RefinementSchedule schedule,
                               RefinementMode mode, std::uint64_t seed) {
  SolverConfig cfg;
  cfg.max_total_iters = spec.max_iters;
  cfg.check_frequency = spec.check_freq;
  cfg.schedule = schedule;
  cfg.mode = mode;
  cfg.seed = seed;
  return cfg;
}

SolveResult dispatch(const ProblemInstance& p, const SolverSpec& spec, const Instrumentation& inst) {
  const std::string& s = spec.name;
  const Side side = p.meta.side;
  const SolveControls controls{.max_iters = spec.max_iters};
  const std::uint64_t seed = derive_seed(p.meta.seed, 17);

  if (s == "lsqr") return lsqr(p.op, p.b, controls, inst);
  if (s == "gmres") return gmres(p.op, p.b, controls, side == Side::right ? &p.pre : nullptr, inst);
  if (s == "cg") return cg(p.op, p.b, controls, nullptr, inst);

  if (one_of(s, {"plsqr", "plsqr_ir_auto", "plsqr_ir_fixed", "plsqr_ir_restart", "meta"})) {
    require_side(s, side, {Side::right, Side::none});
    if (s == "plsqr") return plsqr(p.op, p.pre, p.b, controls, inst);
    if (s == "meta") {
      MetaSolverConfig cfg;
      cfg.max_sweeps = spec.max_iters;
      cfg.seed = seed;
      return meta_solver(p.op, p.pre, p.b, cfg, inst);
    }
    const auto schedule =
        s == "plsqr_ir_fixed" ? RefinementSchedule::fixed : RefinementSchedule::automatic;
    const auto mode =
        s == "plsqr_ir_restart" ? RefinementMode::restart : RefinementMode::iterative_refinement;
    return plsqr_ir(p.op, p.pre, p.b, refinement_config(spec, schedule, mode, seed), inst);
  }
  if (one_of(s, {"left_plsqr", "cgnr_left", "cgne_left"})) {
    require_side(s, side, {Side::left, Side::none});
    if (s == "left_plsqr") return left_plsqr(p.op, p.pre, p.b, controls, inst);
    if (s == "cgnr_left") return cgnr_left(p.op, p.pre, p.b, controls, inst);
    return cgne_left(p.op, p.pre, p.b, controls, inst);
  }
  if (one_of(s, {"pcg", "pcg_ir"})) {
    require_side(s, side, {Side::spd, Side::none});
    if (s == "pcg") return cg(p.op, p.b, controls, &p.pre, inst);
    return pcg_ir(p.op, p.pre, p.b,
                  refinement_config(spec, RefinementSchedule::automatic,
                                    RefinementMode::iterative_refinement, seed),
                  inst);
  }
  throw InvalidSpec("unknown solver '" + s + "'");
}

}  // namespace

std::string RunSummary::id() const { return case_name.empty() ? solver : case_name + "-" + solver; }

const Run* ExperimentOutput::find(const std::string& case_name, const std::string& solver) const {
  for (const Run& r : runs) {
    if (r.summary.case_name == case_name && r.summary.solver == solver) return &r;
  }
  return nullptr;
}

const CaseInfo* ExperimentOutput::find_case(const std::string& name) const {
  for (const CaseInfo& c : cases) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::vector<NamedInstance> build_cases(const ExperimentConfig& cfg) {
  validate(cfg);
  const ProblemParams& p = cfg.problem;
  std::vector<NamedInstance> cases;
  switch (p.generator) {
    case Generator::right:
      cases.push_back({"", gen_right_preconditioned(p.n, p.kappa_a, p.kappa_pre, p.seed)});
      break;
    case Generator::left:
      cases.push_back({"", gen_left_preconditioned(p.n, p.kappa_a, p.kappa_pre, p.seed)});
      break;
    case Generator::trio: {
      ProblemTrio trio = gen_gmres_lsqr_trio(p.n, p.seed);
      cases.push_back({"cluster_ill", std::move(trio.cluster_ill)});
      cases.push_back({"spread_well", std::move(trio.spread_well)});
      cases.push_back({"cluster_well", std::move(trio.cluster_well)});
      break;
    }
    case Generator::shift:
      cases.push_back({"", gen_shift_matrix(p.n)});
      break;
    case Generator::wishart:
      cases.push_back({"", gen_spd_wishart(p.n, p.kappa_a, p.wishart_factor, p.seed)});
      break;
    case Generator::kernel: {
      const DenseMatrix points =
          p.data ? ingest_libsvm(*p.data, p.n, derive_seed(p.seed, kPointsStream))
                 : synthetic_points(p.n, p.dim, derive_seed(p.seed, kPointsStream));
      cases.push_back({"", kernel_nystrom_problem(points, p.lambda, p.rank, p.seed)});
      break;
    }
  }
  return cases;
}

std::optional<double> target_berr(const std::string& solver, std::size_t n) {
  const double root_n = std::sqrt(static_cast<double>(n));
  if (solver.starts_with("plsqr_ir") || solver == "meta" || solver == "pcg_ir") {
    return root_n * kUnitRoundoff;
  }
  if (solver == "left_plsqr") return 10.0 * root_n * kUnitRoundoff;
  if (solver == "direct") return 100.0 * static_cast<double>(n) * kUnitRoundoff;
  return std::nullopt;
}

std::vector<Row> rows_from_history(const ConvergenceHistory& history) {
  std::vector<Row> rows;
  rows.reserve(history.records().size());
  for (const IterationRecord& rec : history.records()) {
    rows.push_back({rec.iteration, rec.residual.value_or(rec.residual_estimate), rec.berr,
                    rec.forward_error, rec.event});
  }
  return rows;
}

Run run_solver(const NamedInstance& c, const SolverSpec& spec, std::size_t measure_every) {
  const ProblemInstance& p = c.instance;
  const Monitor monitor = oracle_monitor(p.a, p.b, p.norm_a, p.x_ref, measure_every);
  Run run;
  RunSummary& s = run.summary;
  s.case_name = c.name;
  s.solver = spec.name;

  if (spec.name == "direct") {
    const Vector x = lu_solve(*p.a, p.b, 0);
    const Measurement m = monitor.measure(x);
    run.rows.push_back({0, m.residual, m.berr, m.forward_error, Event::terminated});
    s.status = Status::converged;
  } else {
    Instrumentation inst;
    inst.monitor = monitor;
    const SolveResult result = dispatch(p, spec, inst);
    run.rows = rows_from_history(result.history);
    s.status = result.status;
    s.refinements = result.history.refinements();
    s.counts = result.history.counts;
  }

  const Row& last = run.rows.back();
  s.iterations = last.iteration;
  s.final_berr = last.berr;
  s.final_forward_error = last.forward_error;
  s.final_residual = last.residual;
  s.target_berr = target_berr(spec.name, p.a->cols());
  s.met_target = !s.target_berr || (s.final_berr && *s.final_berr <= *s.target_berr);
  return run;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg,
                                const std::vector<NamedInstance>& cases) {
  ExperimentOutput out;
  out.config = cfg;
  for (const NamedInstance& c : cases) {
    out.cases.push_back({c.name, c.instance.meta, c.instance.norm_a, norm2(c.instance.b)});
    for (const SolverSpec& spec : cfg.solvers) {
      out.runs.push_back(run_solver(c, spec, cfg.measure_every));
    }
  }
  return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(cfg, build_cases(cfg));
}

bool all_targets_met(const ExperimentOutput& out) {
  return std::all_of(out.runs.begin(), out.runs.end(), [](const Run& r) {
    return r.summary.met_target && r.summary.status != Status::no_progress;
  });
}

}  // namespace stablepc::experiments
