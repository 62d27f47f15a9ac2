// Serial reference against the OpenMP path loops.
#include <benchmark/benchmark.h>

#include <memory>

#include "rootbarrier/barrier.hpp"
#include "rootbarrier/parabola.hpp"
#include "rootbarrier/simulate.hpp"

using namespace rootbarrier;

namespace {

std::vector<double> uniform(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

const Barrier& parabola_barrier() {
    static const Barrier b = [] {
        const ParabolaCase pc;
        return Barrier::from_function(uniform(-3.0, 4.0, 561), [&](double x) { return pc.R(x); });
    }();
    return b;
}

SimulationConfig config(const benchmark::State& state) {
    SimulationConfig c;
    c.n_paths = static_cast<std::size_t>(state.range(0));
    c.dt = 1e-3;
    c.seed = 1;
    c.horizon = 8.0;
    c.execution = state.range(1) ? Execution::parallel : Execution::serial;
    return c;
}

void BM_StoppedBrownian(benchmark::State& state) {
    const SimulationConfig c = config(state);
    for (auto _ : state) {
        PathBatch b = simulate_stopped(DiffusionSpec::brownian(), Measure::dirac(0.0), parabola_barrier(), c);
        benchmark::DoNotOptimize(b.stopped_values.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}

void BM_StoppedLocalVol(benchmark::State& state) {
    const SimulationConfig c = config(state);
    const DiffusionSpec d = DiffusionSpec::tanh_local(1.0, 0.3);
    for (auto _ : state) {
        PathBatch b = simulate_stopped(d, Measure::dirac(0.0), parabola_barrier(), c);
        benchmark::DoNotOptimize(b.stopped_values.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}

void BM_Ladder(benchmark::State& state) {
    const SimulationConfig c = config(state);
    const std::vector<double> times{0.5, 1.0, 2.0, 4.0};
    for (auto _ : state) {
        LadderSample s = sample_ladder(DiffusionSpec::brownian(), Measure::dirac(0.0), parabola_barrier(), times, c);
        benchmark::DoNotOptimize(s.stopped_x.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}

void BM_PriceModel(benchmark::State& state) {
    SimulationConfig c = config(state);
    const PriceModel m = PriceModel::constant_vol(100.0, 1.0, 0.2, RateCurve::flat(0.02));
    const HoldingFn hold = [](double x, double tau) { return 0.01 * x * (1.0 - tau); };
    for (auto _ : state) {
        PathBatch b = simulate_price_model(m, c, &hold);
        benchmark::DoNotOptimize(b.hedge_gains.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}

}  // namespace

// Second argument: 0 serial, 1 parallel.
BENCHMARK(BM_StoppedBrownian)->ArgsProduct({{2000, 20000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StoppedLocalVol)->ArgsProduct({{2000, 20000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ladder)->ArgsProduct({{2000, 20000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PriceModel)->ArgsProduct({{2000, 20000}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
