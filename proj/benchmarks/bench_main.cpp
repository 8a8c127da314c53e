#include "altproj/certify.hpp"
#include "altproj/constructions.hpp"
#include "altproj/iterates.hpp"
#include "altproj/quantities.hpp"

#include <benchmark/benchmark.h>

using namespace altproj;

static void BM_Project(benchmark::State& state) {
  const Index d = state.range(0);
  const SubspaceFamily f = random_family(d, 2, 1, {d / 2, d / 2});
  const Vector x = random_unit_vector(d, 2);
  for (auto _ : state) benchmark::DoNotOptimize(f.members()[0].project(x));
}
BENCHMARK(BM_Project)->Arg(8)->Arg(64)->Arg(512);

static void BM_RemotestRun(benchmark::State& state) {
  const Index d = state.range(0);
  const SubspaceFamily f = random_family(d, 4, 3);
  const Vector x = random_unit_vector(d, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(f, x, Policy::remotest(), {.n_steps = 1000, .stop_norm = 0.0, .store_iterates = false}));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_RemotestRun)->Arg(8)->Arg(64);

static void BM_BlockRemotest(benchmark::State& state) {
  const BlockInstance inst = block_family(BlockConstruction::preset(0.25, static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(inst.family, inst.x0, Policy::remotest(), {.n_steps = 100, .store_iterates = false}));
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_BlockRemotest)->Arg(50)->Arg(400);

static void BM_BlockClosedForm(benchmark::State& state) {
  const BlockConstruction cfg = BlockConstruction::preset(0.25, 400);
  std::size_t n = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(block_cyclic_norm(cfg, n++));
}
BENCHMARK(BM_BlockClosedForm);

static void BM_SNorm(benchmark::State& state) {
  const Index d = state.range(0);
  const SubspaceFamily f = random_family(d, static_cast<std::size_t>(state.range(1)), 5);
  const Vector y = random_unit_vector(d, 6);
  for (auto _ : state) benchmark::DoNotOptimize(s_norm(f, y));
}
BENCHMARK(BM_SNorm)->Args({4, 2})->Args({10, 4})->Args({32, 4});

static void BM_Friedrichs(benchmark::State& state) {
  const Index d = state.range(0);
  const SubspaceFamily f = random_family(d, 4, 7);
  for (auto _ : state) benchmark::DoNotOptimize(friedrichs_number(f));
}
BENCHMARK(BM_Friedrichs)->Arg(8)->Arg(64);

static void BM_RhoEstimate(benchmark::State& state) {
  const SubspaceFamily f = random_family(state.range(0), 3, 8);
  for (auto _ : state) benchmark::DoNotOptimize(rho_estimate(f, RhoMode::full_sphere, {.restarts = 4, .seed = 1}));
}
BENCHMARK(BM_RhoEstimate)->Arg(3)->Arg(8);

static void BM_DecayLedger(benchmark::State& state) {
  const SubspaceFamily f = random_family(6, 3, 9);
  const Vector x = random_unit_vector(6, 10);
  for (auto _ : state) benchmark::DoNotOptimize(decay_ledger(f, x, 1000));
}
BENCHMARK(BM_DecayLedger);
BENCHMARK_MAIN();
