#include "cdpg/scenarios.hpp"
#include "cdpg/solver.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace cdpg;

void bench_assemble(benchmark::State& state) {
    const auto problem = commodity_market().build();
    for (auto _ : state) {
        Assembly asmb = assemble(problem);
        benchmark::DoNotOptimize(asmb.dual_dim);
    }
}
BENCHMARK(bench_assemble);

void bench_step_sizes(benchmark::State& state) {
    const auto problem = commodity_market().build();
    const Assembly asmb = assemble(problem);
    for (auto _ : state) {
        StepSizes steps = step_sizes(problem, asmb, 1.0);
        benchmark::DoNotOptimize(steps.tau_max);
    }
}
BENCHMARK(bench_step_sizes);

void bench_iterate(benchmark::State& state) {
    const auto problem = commodity_market().build();
    CdpgSolver solver(problem);
    IterateState it = solver.initial_state();
    const int workers = static_cast<int>(state.range(0));
    for (auto _ : state) {
        it = solver.iterate(it, workers);
        benchmark::DoNotOptimize(it.lambda.data());
    }
}
BENCHMARK(bench_iterate)->Arg(1)->Arg(2)->Arg(4);

void bench_iterate_dispatch(benchmark::State& state) {
    const auto problem = emission_dispatch().build();
    CdpgSolver solver(problem);
    IterateState it = solver.initial_state();
    for (auto _ : state) {
        it = solver.iterate(it);
        benchmark::DoNotOptimize(it.lambda.data());
    }
}
BENCHMARK(bench_iterate_dispatch);

void bench_metrics(benchmark::State& state) {
    const auto problem = commodity_market().build();
    CdpgSolver solver(problem);
    IterateState it = solver.initial_state();
    for (int t = 0; t < 100; ++t) it = solver.iterate(it);
    for (auto _ : state) {
        Metrics m = solver.metrics(it);
        benchmark::DoNotOptimize(m.lagrangian);
    }
}
BENCHMARK(bench_metrics);

}  // namespace

BENCHMARK_MAIN();
