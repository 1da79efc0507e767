// Hot paths: dense products, the loss gradient, the proximal operators, and
// one full inner solve. Sizes bracket realistic problems (D up to a few
// thousand, K a few hundred, modest per-task pools).

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "attrmtl/dataio.hpp"
#include "attrmtl/loss.hpp"
#include "attrmtl/matrix.hpp"
#include "attrmtl/model.hpp"
#include "attrmtl/optim.hpp"
#include "attrmtl/regularizers.hpp"
#include "attrmtl/rng.hpp"

using namespace attrmtl;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Matrix a(rows, cols);
  for (double& v : a.data()) v = scale * rng.normal();
  return a;
}

Dataset bench_dataset(std::size_t d, std::size_t m, std::size_t n) {
  SynthSpec sp;
  sp.d = d;
  sp.m = m;
  sp.k_true = m;
  sp.partition = GroupPartition::contiguous(m, 2);
  sp.n_per_task = {n};
  sp.n_test_per_task = 1;
  return generate_synthetic(sp, 7).train;
}

void BM_matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Matrix a = random_matrix(n, n, 1);
  Matrix b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(a * b);
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_matmul)->Arg(64)->Arg(256);

void BM_matmul_at_b(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Matrix a = random_matrix(n, n, 3);
  Matrix b = random_matrix(n, n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(matmul_at_b(a, b));
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_matmul_at_b)->Arg(64)->Arg(256);

void BM_loss_grad_s(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Dataset ds = bench_dataset(d, 12, 100);
  const std::size_t k = 24;
  Matrix l = random_matrix(d, k, 5, 0.1);
  Matrix s = random_matrix(k, 12, 6, 0.1);
  Matrix g(k, 12);
  for (auto _ : state) benchmark::DoNotOptimize(sqhinge_value_grad_s(l, s, ds, g));
}
BENCHMARK(BM_loss_grad_s)->Arg(100)->Arg(500);

void BM_loss_grad_l(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Dataset ds = bench_dataset(d, 12, 100);
  const std::size_t k = 24;
  Matrix l = random_matrix(d, k, 7, 0.1);
  Matrix s = random_matrix(k, 12, 8, 0.1);
  Matrix g(d, k);
  for (auto _ : state) benchmark::DoNotOptimize(sqhinge_value_grad_l(l, s, ds, g));
}
BENCHMARK(BM_loss_grad_l)->Arg(100)->Arg(500);

void BM_prox_l1(benchmark::State& state) {
  Matrix v = random_matrix(512, 128, 9);
  for (auto _ : state) benchmark::DoNotOptimize(prox_l1(v, 0.05));
}
BENCHMARK(BM_prox_l1);

void BM_prox_group_l21(benchmark::State& state) {
  Matrix v = random_matrix(128, 96, 10);
  GroupPartition part = GroupPartition::contiguous(96, 8);
  for (auto _ : state) benchmark::DoNotOptimize(prox_group_l21(v, 0.05, part));
}
BENCHMARK(BM_prox_group_l21);

void BM_smooth_group_l21(benchmark::State& state) {
  Matrix s = random_matrix(128, 96, 11);
  GroupPartition part = GroupPartition::contiguous(96, 8);
  for (auto _ : state) benchmark::DoNotOptimize(smooth_group_l21(s, part, 1e-4));
}
BENCHMARK(BM_smooth_group_l21);

void BM_solve_s_spg(benchmark::State& state) {
  Dataset ds = bench_dataset(100, 12, 100);
  const std::size_t k = 24;
  Matrix l = random_matrix(100, k, 12, 0.1);
  const GroupPartition part = GroupPartition::contiguous(12, 2);
  const std::vector<double> bounds = task_spectral_bounds(ds);
  SSolveOpts opts;
  opts.solver.max_iter = 50;
  opts.solver.tol = 0.0;  // fixed-length solve so runs are comparable
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_s_spg(l, ds, part, 0.1, 1e-4, opts, nullptr, nullptr, &bounds));
}
BENCHMARK(BM_solve_s_spg)->Unit(benchmark::kMillisecond);

void BM_solve_l_apg(benchmark::State& state) {
  Dataset ds = bench_dataset(100, 12, 100);
  const std::size_t k = 24;
  Matrix s = random_matrix(k, 12, 13, 0.1);
  const std::vector<double> bounds = task_spectral_bounds(ds);
  SolverOpts opts;
  opts.max_iter = 50;
  opts.tol = 0.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_l_apg(s, ds, 0.05, 0.4, opts, nullptr, nullptr, &bounds));
}
BENCHMARK(BM_solve_l_apg)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
