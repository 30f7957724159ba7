#include <benchmark/benchmark.h>
#include <cmath>

#include "bkl/config.hpp"
#include "bkl/integrator.hpp"

using namespace bkl;

static void BM_IntegratePreset(benchmark::State& state, const char* name) {
    const RunConfig cfg = preset(name);
    const AnyPhasePoint ic = initial_condition(cfg);
    std::size_t steps = 0;
    for (auto _ : state) {
        const Trajectory t = integrate(ic, cfg.integrator);
        steps = t.samples().size();
        benchmark::DoNotOptimize(steps);
    }
    state.counters["samples"] = static_cast<double>(steps);
}
BENCHMARK_CAPTURE(BM_IntegratePreset, exact, "exact")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_IntegratePreset, generic, "generic-collapse")->Unit(benchmark::kMillisecond);

static void BM_IntegrateTolerance(benchmark::State& state) {
    const RunConfig cfg = preset("generic-collapse");
    IntegratorParams p = cfg.integrator;
    p.rel_tol = std::pow(10.0, -static_cast<double>(state.range(0)));
    p.abs_tol = p.rel_tol * 1e-2;
    const AnyPhasePoint ic = initial_condition(cfg);
    for (auto _ : state) benchmark::DoNotOptimize(integrate(ic, p));
}
BENCHMARK(BM_IntegrateTolerance)->DenseRange(8, 13, 1)->Unit(benchmark::kMillisecond);
