#include <benchmark/benchmark.h>

#include "stablepc/problems.hpp"
#include "stablepc/solvers.hpp"

using namespace stablepc;

// Cost per iteration is dominated by matvecs, so time per run / max_iters is
// the per-step cost.
static void BM_PlsqrSteps(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ProblemInstance p = gen_right_preconditioned(n, 1e10, 4, 1);
  for (auto _ : state) benchmark::DoNotOptimize(plsqr(p.op, p.pre, p.b, {.max_iters = 50}));
  state.SetItemsProcessed(state.iterations() * 50);
}
BENCHMARK(BM_PlsqrSteps)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_PlsqrIr(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ProblemInstance p = gen_right_preconditioned(n, 1e10, 4, 1);
  SolverConfig cfg;
  cfg.max_total_iters = 300;
  for (auto _ : state) benchmark::DoNotOptimize(plsqr_ir(p.op, p.pre, p.b, cfg));
}
BENCHMARK(BM_PlsqrIr)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_Gmres(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ProblemInstance p = gen_gmres_lsqr_trio(n, 2).cluster_well;
  for (auto _ : state) benchmark::DoNotOptimize(gmres(p.op, p.b, {.max_iters = 50}));
}
BENCHMARK(BM_Gmres)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);
