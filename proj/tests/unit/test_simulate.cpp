#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numeric>

#include "rootbarrier/barrier.hpp"
#include "rootbarrier/optimality.hpp"
#include "rootbarrier/parabola.hpp"
#include "rootbarrier/simulate.hpp"

using namespace rootbarrier;

namespace {

std::vector<double> uniform(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

Barrier parabola_barrier() {
    const ParabolaCase pc;
    return Barrier::from_function(uniform(-3.0, 4.0, 561), [&](double x) { return pc.R(x); });
}

SimulationConfig cfg(std::size_t n, Execution ex) {
    SimulationConfig c;
    c.n_paths = n;
    c.dt = 2e-3;
    c.seed = 7;
    c.horizon = 8.0;
    c.execution = ex;
    return c;
}

}  // namespace

TEST(Kernels, StoppedSerialAndParallelAgreeBitwise) {
    const Barrier b = parabola_barrier();
    const PathBatch s = simulate_stopped(DiffusionSpec::brownian(), Measure::normal(0.0, 0.1), b,
                                         cfg(3000, Execution::serial));
    const PathBatch p = simulate_stopped(DiffusionSpec::brownian(), Measure::normal(0.0, 0.1), b,
                                         cfg(3000, Execution::parallel));
    EXPECT_EQ(s.stopped_values, p.stopped_values);
    EXPECT_EQ(s.stop_times, p.stop_times);
    EXPECT_EQ(s.start_values, p.start_values);
}

TEST(Kernels, EulerSerialAndParallelAgreeBitwise) {
    const Barrier b = Barrier::constant(uniform(-5.0, 5.0, 101), 0.5);
    const DiffusionSpec d = DiffusionSpec::tanh_local(1.0, 0.3);
    const PathBatch s = simulate_stopped(d, Measure::dirac(0.0), b, cfg(2000, Execution::serial));
    const PathBatch p = simulate_stopped(d, Measure::dirac(0.0), b, cfg(2000, Execution::parallel));
    EXPECT_EQ(s.stopped_values, p.stopped_values);
}

TEST(Kernels, LadderSerialAndParallelAgreeBitwise) {
    const Barrier b = parabola_barrier();
    const std::vector<double> times{0.5, 1.0, 2.0};
    const LadderSample s = sample_ladder(DiffusionSpec::brownian(), Measure::dirac(0.0), b, times,
                                         cfg(2000, Execution::serial));
    const LadderSample p = sample_ladder(DiffusionSpec::brownian(), Measure::dirac(0.0), b, times,
                                         cfg(2000, Execution::parallel));
    EXPECT_EQ(s.stopped_x, p.stopped_x);
    EXPECT_EQ(s.stopped_t, p.stopped_t);
    EXPECT_EQ(s.free_x, p.free_x);
}

TEST(Kernels, PriceModelSerialAndParallelAgreeBitwise) {
    const PriceModel m = PriceModel::constant_vol(100.0, 1.0, 0.2, RateCurve::flat(0.03));
    const HoldingFn hold = [](double x, double) { return 0.01 * x; };
    SimulationConfig c = cfg(2000, Execution::serial);
    c.dt = 1e-2;
    const PathBatch s = simulate_price_model(m, c, &hold);
    c.execution = Execution::parallel;
    const PathBatch p = simulate_price_model(m, c, &hold);
    EXPECT_EQ(s.stopped_values, p.stopped_values);
    EXPECT_EQ(s.realized_variance, p.realized_variance);
    EXPECT_EQ(s.hedge_gains, p.hedge_gains);
}

TEST(Kernels, IntervalCompetitorSerialAndParallelAgreeBitwise) {
    SimulationConfig c = cfg(2000, Execution::serial);
    c.horizon = 50.0;
    const PathBatch s = simulate_randomized_interval(Measure::normal(0.0, 1.0), 0.0, 2, c);
    c.execution = Execution::parallel;
    const PathBatch p = simulate_randomized_interval(Measure::normal(0.0, 1.0), 0.0, 2, c);
    EXPECT_EQ(s.stopped_values, p.stopped_values);
    EXPECT_EQ(s.stop_times, p.stop_times);
}

TEST(Kernels, StopMatchesReferenceHitTime) {
    const Barrier b = parabola_barrier();
    SimulationConfig c = cfg(300, Execution::serial);
    c.keep_paths = true;
    const PathBatch batch = simulate_stopped(DiffusionSpec::brownian(), Measure::dirac(0.0), b, c);
    for (std::size_t p = 0; p < batch.n_paths; ++p) {
        const auto& xs = batch.states[p];
        std::vector<double> ts(xs.size());
        for (std::size_t k = 0; k < ts.size(); ++k) ts[k] = std::min(static_cast<double>(k) * c.dt, c.horizon);
        const std::size_t k = hit_time(b, ts, xs);
        if (batch.at_horizon[p]) {
            EXPECT_EQ(k, ts.size());
            continue;
        }
        ASSERT_EQ(k, xs.size() - 1) << p;
        EXPECT_DOUBLE_EQ(batch.stopped_values[p], xs[k]);
        EXPECT_NEAR(batch.stop_times[p], ts[k], 1e-12);
    }
}

TEST(Simulate, ConstantBarrierGivesGaussianAtThatTime) {
    const Barrier b = Barrier::constant(uniform(-8.0, 8.0, 201), 1.0);
    SimulationConfig c = cfg(20000, Execution::parallel);
    c.dt = 1e-2;
    const PathBatch batch = simulate_stopped(DiffusionSpec::brownian(), Measure::dirac(0.0), b, c);
    for (double t : batch.stop_times) ASSERT_NEAR(t, 1.0, 1e-9);
    EXPECT_LT(ks_statistic(batch.stopped_values, Measure::normal(0.0, 1.0)), ks_critical_1pct(20000));
}

TEST(Simulate, HorizonFlagsUnstoppedPaths) {
    const Barrier b = Barrier::constant(uniform(-8.0, 8.0, 201), 5.0);
    SimulationConfig c = cfg(100, Execution::serial);
    c.horizon = 1.0;
    c.dt = 0.1;
    const PathBatch batch = simulate_stopped(DiffusionSpec::brownian(), Measure::dirac(0.0), b, c);
    EXPECT_DOUBLE_EQ(batch.horizon_mass(), 1.0);
    EXPECT_TRUE(batch.horizon_warning());
}

TEST(Simulate, ParabolaMeanExitTimeMatchesM) {
    // f(t) = t, so M(x, 0) = E tau from x.
    const ParabolaCase pc;
    const Barrier b = parabola_barrier();
    SimulationConfig c = cfg(20000, Execution::parallel);
    c.dt = 1e-3;
    const PathBatch batch = simulate_stopped(DiffusionSpec::brownian(), Measure::dirac(0.5), b, c);
    const MeanSE tau = mean_se(batch.stop_times);
    EXPECT_NEAR(tau.mean, pc.M(0.5, 0.0), 3.0 * tau.se + 0.02);
}

TEST(Simulate, EmpiricalPotentialMatchesMeasure) {
    const std::vector<double> v{-1.0, 0.2, 0.2, 3.5, 0.0};
    const std::vector<double> grid{-2.0, -0.5, 0.1, 0.2, 1.0, 4.0};
    const Potential p = empirical_potential(v, grid);
    const Measure e = Measure::empirical(v);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(p.values[i], e.potential_at(grid[i]), 1e-14);
}

TEST(PriceModel, ConstantVolRealisedVarianceAndMartingale) {
    const double vol = 0.25, T = 0.5;
    const PriceModel m = PriceModel::constant_vol(100.0, T, vol, RateCurve::flat(0.02));
    SimulationConfig c = cfg(20000, Execution::parallel);
    c.dt = 1e-3;
    const PathBatch b = simulate_price_model(m, c);
    const MeanSE x = mean_se(b.stopped_values);
    EXPECT_NEAR(x.mean, 100.0, 3.0 * x.se);
    const MeanSE rv = mean_se(b.realized_variance);
    EXPECT_NEAR(rv.mean, vol * vol * T, 1e-3);
}

TEST(PriceModel, TimeChangeWithFlatBarrierIsLognormal) {
    // A flat barrier at v in the inner clock stops at total variance v.
    const double v = 0.04;
    auto bar = std::make_shared<const Barrier>(Barrier::constant(uniform(-3.0, 3.0, 121), v, true));
    const PriceModel m = PriceModel::time_change(1.0, 1.0, bar);
    SimulationConfig c = cfg(20000, Execution::parallel);
    c.dt = 1e-4;
    c.horizon = 1.0;
    const PathBatch b = simulate_price_model(m, c);
    std::vector<double> logs;
    for (double x : b.stopped_values) logs.push_back(std::log(x));
    EXPECT_LT(ks_statistic(logs, Measure::normal(-0.5 * v, v)), ks_critical_1pct(logs.size()));
    const MeanSE rv = mean_se(b.realized_variance);
    EXPECT_NEAR(rv.mean, v, 1e-3);
}
