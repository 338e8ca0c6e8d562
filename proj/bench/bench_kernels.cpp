// Serial versus OpenMP variants of the two hot kernels: scenario filling and
// scenario scoring.  Items processed counts (station, sample) cells.
#include <cstddef>
#include <vector>

#include <benchmark/benchmark.h>

#include "chargeopt/evaluation.hpp"
#include "chargeopt/instance.hpp"
#include "chargeopt/scenario.hpp"

using namespace chargeopt;

namespace {

const Instance& bench_instance() {
    static const Instance inst = embedded_surabaya_parameters();
    return inst;
}

void fill_args(benchmark::internal::Benchmark* b) {
    b->Arg(1 << 12)->Arg(1 << 15)->Arg(1 << 18)->Unit(benchmark::kMillisecond);
}

void run_fill(benchmark::State& state, bool parallel) {
    const Instance& inst = bench_instance();
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    PairedScenarioSet out;
    for (auto _ : state) {
        if (parallel)
            fill_scenarios_parallel(inst, n, 7, kDefaultRho, out);
        else
            fill_scenarios_serial(inst, n, 7, kDefaultRho, out);
        benchmark::DoNotOptimize(out.stations.back().z_samples.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n * inst.num_stations()));
}

void run_score(benchmark::State& state, bool parallel) {
    const Instance& inst = bench_instance();
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const PairedScenarioSet set = sample_paired_scenarios(inst, n, 7, kDefaultRho);
    std::vector<double> rev(inst.num_stations()), pen(inst.num_stations());
    for (std::size_t j = 0; j < inst.num_stations(); ++j) {
        rev[j] = 1000.0 + static_cast<double>(j);
        pen[j] = 100.0 + static_cast<double>(j);
    }
    for (auto _ : state) {
        ScenarioScores s = score_scenarios(set, rev, pen, {}, {}, 12345.0, parallel);
        benchmark::DoNotOptimize(s.objective.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n * inst.num_stations()));
}

void BM_FillSerial(benchmark::State& state) { run_fill(state, false); }
void BM_FillParallel(benchmark::State& state) { run_fill(state, true); }
void BM_ScoreSerial(benchmark::State& state) { run_score(state, false); }
void BM_ScoreParallel(benchmark::State& state) { run_score(state, true); }

} // namespace

BENCHMARK(BM_FillSerial)->Apply(fill_args);
BENCHMARK(BM_FillParallel)->Apply(fill_args);
BENCHMARK(BM_ScoreSerial)->Apply(fill_args);
BENCHMARK(BM_ScoreParallel)->Apply(fill_args);

BENCHMARK_MAIN();
