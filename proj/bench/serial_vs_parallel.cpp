// Serial reference against the OpenMP kernels on the hot loops.
// Set the pool size with OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "conslaw/excursion.hpp"
#include "conslaw/experiments.hpp"
#include "conslaw/shocks.hpp"

using namespace conslaw;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

void excursion_ensemble(benchmark::State& state) {
    for (auto _ : state) {
        ExcursionEnsemble ens(4000, 256, 1, exec_of(state));
        benchmark::DoNotOptimize(ens.moments(0).data());
    }
}

void chernoff_density_grid(benchmark::State& state) {
    const ExcursionEnsemble ens(4000, 256, 1, exec_of(state));
    std::vector<double> grid;
    for (int i = -20; i <= 20; ++i) grid.push_back(0.1 * i);
    for (auto _ : state) benchmark::DoNotOptimize(chernoff_density(ConvexFunction::quadratic(2.0), grid, ens));
}

void direct_argmax(benchmark::State& state) {
    const auto phi = ConvexFunction::quadratic(2.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(direct_argmax_samples(phi, 6.0, 1.0 / 512, 500, 1, exec_of(state)));
}

void shock_census_levels(benchmark::State& state) {
    CensusParams p;
    p.levy.jump_intensity = 1.0;
    p.levels = 3;
    p.replicates = 8;
    p.exec = exec_of(state);
    for (auto _ : state) benchmark::DoNotOptimize(census_experiment(ConvexFunction::quadratic(1.0), p));
}

}  // namespace

BENCHMARK(excursion_ensemble)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(chernoff_density_grid)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(direct_argmax)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(shock_census_levels)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
