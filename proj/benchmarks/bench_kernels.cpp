#include <benchmark/benchmark.h>

#include "stablepc/dense.hpp"
#include "stablepc/linalg.hpp"
#include "stablepc/metrics.hpp"
#include "stablepc/operators.hpp"
#include "stablepc/rng.hpp"

using namespace stablepc;

static void BM_DenseApply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const LinearOperator op = dense_operator(gaussian_matrix(n, n, 1));
  const Vector z = gaussian_vector(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(op.apply(z));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_DenseApply)->Arg(250)->Arg(1000);

static void BM_DenseApplyAdjoint(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const LinearOperator op = dense_operator(gaussian_matrix(n, n, 1));
  const Vector w = gaussian_vector(n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(op.apply_adjoint(w));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_DenseApplyAdjoint)->Arg(250)->Arg(1000);

static void BM_CompensatedResidual(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = gaussian_matrix(n, n, 4);
  const Vector x = gaussian_vector(n, 5);
  const Vector b = gaussian_vector(n, 6);
  for (auto _ : state) benchmark::DoNotOptimize(compensated_residual(a, x, b));
}
BENCHMARK(BM_CompensatedResidual)->Arg(250)->Arg(1000);

static void BM_NaiveResidual(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = gaussian_matrix(n, n, 4);
  const Vector x = gaussian_vector(n, 5);
  const Vector b = gaussian_vector(n, 6);
  for (auto _ : state) benchmark::DoNotOptimize(naive_residual(a, x, b));
}
BENCHMARK(BM_NaiveResidual)->Arg(250)->Arg(1000);

static void BM_HouseholderQr(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = gaussian_matrix(n, n, 7);
  for (auto _ : state) benchmark::DoNotOptimize(householder_qr(a));
}
BENCHMARK(BM_HouseholderQr)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

static void BM_NystromPre(benchmark::State& state) {
  const std::size_t n = 1000;
  const auto k = static_cast<std::size_t>(state.range(0));
  const Preconditioner p = nystrom_preconditioner(gaussian_matrix(n, k, 8), 1e-3);
  const Vector z = gaussian_vector(n, 9);
  for (auto _ : state) benchmark::DoNotOptimize(p.pre(z));
}
BENCHMARK(BM_NystromPre)->Arg(50)->Arg(200);
