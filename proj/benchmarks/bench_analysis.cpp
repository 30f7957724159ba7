#include <benchmark/benchmark.h>

#include "bkl/config.hpp"
#include "bkl/epoch_analysis.hpp"
#include "bkl/exact_solution.hpp"
#include "bkl/integrator.hpp"

using namespace bkl;

namespace {

const Trajectory& generic_run() {
    static const Trajectory t = [] {
        const RunConfig cfg = preset("generic-collapse");
        return integrate(initial_condition(cfg), cfg.integrator);
    }();
    return t;
}

}  // namespace

static void BM_DetectReflections(benchmark::State& state) {
    const Trajectory& t = generic_run();
    for (auto _ : state) benchmark::DoNotOptimize(detect_reflections(t));
}
BENCHMARK(BM_DetectReflections)->Unit(benchmark::kMicrosecond);

static void BM_EpochSegments(benchmark::State& state) {
    const Trajectory& t = generic_run();
    const auto events = detect_reflections(t);
    for (auto _ : state) benchmark::DoNotOptimize(epoch_segments(t, events));
}
BENCHMARK(BM_EpochSegments)->Unit(benchmark::kMicrosecond);

static void BM_LimitEstimates(benchmark::State& state) {
    const Trajectory& t = generic_run();
    for (auto _ : state) benchmark::DoNotOptimize(limit_estimates(t, 0.5));
}
BENCHMARK(BM_LimitEstimates)->Unit(benchmark::kMicrosecond);

static void BM_PerturbationRun(benchmark::State& state) {
    const Vec6 seed{3e-21, -7e-21, 5e-21, 2e-21, 9e-21, -4e-21};
    for (auto _ : state) benchmark::DoNotOptimize(perturbation_run(seed, 66.0));
}
BENCHMARK(BM_PerturbationRun)->Unit(benchmark::kMillisecond);
