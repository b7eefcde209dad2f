#include "fbarcirc/htm.hpp"
#include "fbarcirc/netlist.hpp"

#include <benchmark/benchmark.h>

#include <omp.h>

namespace {

fbarcirc::Netlist design() {
    fbarcirc::CirculatorDesign d;
    d.resonator.c0 = 0.5e-12;
    d.depth = 0.035;
    return fbarcirc::build_circulator(d);
}

void BM_SweepSerial(benchmark::State& state) {
    const auto net = design();
    const auto freqs = fbarcirc::linspace(2.6e9, 2.7e9, static_cast<std::size_t>(state.range(0)));
    const fbarcirc::HarmonicBasis basis{23.2e6, 5};
    for (auto _ : state) benchmark::DoNotOptimize(fbarcirc::sparams_serial(net, basis, freqs));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SweepParallel(benchmark::State& state) {
    const auto net = design();
    const auto freqs = fbarcirc::linspace(2.6e9, 2.7e9, static_cast<std::size_t>(state.range(0)));
    const fbarcirc::HarmonicBasis basis{23.2e6, 5};
    for (auto _ : state) benchmark::DoNotOptimize(fbarcirc::sparams(net, basis, freqs));
    state.SetItemsProcessed(state.iterations() * state.range(0));
    state.counters["threads"] = omp_get_max_threads();
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
