// Serial reference vs OpenMP for the two data-parallel hot loops: root
// finding over the k grid and the point-gap scan over the E₀ grid.

#include "nhssh/kernels.hpp"
#include "nhssh/spectral.hpp"
#include "nhssh/topology.hpp"

#include <benchmark/benchmark.h>

using namespace nhssh;

namespace {

const CircuitParams kRow4{0.05, 1.41, 0.03, 1.34, 1.17, 2, Boundary::Periodic};

Execution mode(const benchmark::State& state) { return state.range(0) == 0 ? Execution::Serial : Execution::Parallel; }

void BM_BandTrace(benchmark::State& state) {
    const auto exec = mode(state);
    const int n_k = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(band_trace(kRow4, n_k, exec));
    state.SetItemsProcessed(state.iterations() * n_k);
    state.SetLabel(exec == Execution::Serial ? "serial" : "omp");
}

void BM_SkinScan(benchmark::State& state) {
    const auto exec = mode(state);
    const int grid = static_cast<int>(state.range(1));
    const Complex omega = branch_frequency_at(kRow4, band_trace(kRow4, 256), 1, kPi / 2);
    for (auto _ : state) benchmark::DoNotOptimize(skin_effect_present(kRow4, omega, grid, 512, exec));
    state.SetItemsProcessed(state.iterations() * grid * grid);
    state.SetLabel(exec == Execution::Serial ? "serial" : "omp");
}

}  // namespace

BENCHMARK(BM_BandTrace)->ArgsProduct({{0, 1}, {256, 4096}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SkinScan)->ArgsProduct({{0, 1}, {20, 50}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
