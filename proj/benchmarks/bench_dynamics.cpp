#include <benchmark/benchmark.h>

#include "bkl/dynamics.hpp"
#include "bkl/exact_solution.hpp"

using namespace bkl;

static void BM_RhsU(benchmark::State& state) {
    DiagChart u = exact_state<Chart::diag>(1.0).position;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rhs_u(u));
        u.value[0] += 1e-12;
    }
}
BENCHMARK(BM_RhsU);

static void BM_RhsUJacobian(benchmark::State& state) {
    const DiagChart u = exact_state<Chart::diag>(2.0).position;
    for (auto _ : state) benchmark::DoNotOptimize(rhs_u_jacobian(u));
}
BENCHMARK(BM_RhsUJacobian);

static void BM_ConstraintResidual(benchmark::State& state) {
    const DiagPoint p = exact_state<Chart::diag>(3.0);
    for (auto _ : state) benchmark::DoNotOptimize(constraint_residual(p));
}
BENCHMARK(BM_ConstraintResidual);
