#include <gtest/gtest.h>

#include <cmath>

#include "rootbarrier/errors.hpp"
#include "rootbarrier/optimality.hpp"
#include "rootbarrier/parabola.hpp"

using namespace rootbarrier;

namespace {

std::vector<double> uniform(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

struct ParabolaHedge {
    ParabolaCase pc;
    Barrier barrier;
    HedgeFunctions hf;
};

const ParabolaHedge& parabola_hedge() {
    static const ParabolaHedge h = [] {
        ParabolaCase pc;
        Barrier b = Barrier::from_function(uniform(-3.0, 4.0, 281), [&](double x) { return pc.R(x); });
        HedgeConfig hc;
        hc.T_max = 12.5;
        hc.nt = 500;
        HedgeFunctions hf = build_hedge(DiffusionSpec::brownian(), b, PayoffSpec::power(2.0, 0.5), hc);
        return ParabolaHedge{pc, std::move(b), std::move(hf)};
    }();
    return h;
}

}  // namespace

TEST(Payoff, ValuesAndDerivatives) {
    const PayoffSpec call = PayoffSpec::variance_call(0.03);
    EXPECT_DOUBLE_EQ(call.F(0.02), 0.0);
    EXPECT_DOUBLE_EQ(call.F(0.05), 0.02);
    EXPECT_DOUBLE_EQ(call.f(0.05), 1.0);
    EXPECT_TRUE(call.bounded());

    const PayoffSpec sq = PayoffSpec::power(2.0, 0.5);
    EXPECT_DOUBLE_EQ(sq.F(3.0), 4.5);
    EXPECT_DOUBLE_EQ(sq.f(3.0), 3.0);
    EXPECT_FALSE(sq.bounded());
    EXPECT_THROW((void)PayoffSpec::power(0.5), InputError);
}

TEST(Payoff, CappingIntegratesTheCappedSlope) {
    const PayoffSpec sq = PayoffSpec::power(2.0, 0.5).capped(2.0);
    EXPECT_TRUE(sq.is_capped());
    EXPECT_DOUBLE_EQ(sq.f(1.0), 1.0);
    EXPECT_DOUBLE_EQ(sq.f(5.0), 2.0);
    // int_0^5 min(s, 2) ds = 2 + 2 * 3
    EXPECT_NEAR(sq.F(5.0), 8.0, 1e-12);
    EXPECT_DOUBLE_EQ(sq.f_bound(), 2.0);
}

TEST(Payoff, CustomTableIntegral) {
    const PayoffSpec t = PayoffSpec::custom_table({0.0, 1.0, 2.0}, {0.0, 1.0, 1.0});
    EXPECT_NEAR(t.F(1.0), 0.5, 1e-12);
    EXPECT_NEAR(t.F(3.0), 2.5, 1e-12);
    EXPECT_DOUBLE_EQ(t.f(10.0), 1.0);
    EXPECT_THROW((void)PayoffSpec::custom_table({0.0, 1.0}, {1.0, 0.5}), InputError);
}

TEST(Hedge, ZMatchesClosedForm) {
    const auto& h = parabola_hedge();
    for (std::size_t i = 0; i < h.hf.x.size(); i += 7)
        EXPECT_NEAR(h.hf.Z[i], h.pc.Z(h.hf.x[i]), 1e-3 * std::max(1.0, std::abs(h.pc.Z(h.hf.x[i])))) << h.hf.x[i];
    EXPECT_NEAR(h.hf.Z_at(1.0), 37.0 / 18.0, 1e-3);
}

TEST(Hedge, MMatchesClosedForm) {
    const auto& h = parabola_hedge();
    for (double x : {-1.5, 0.0, 0.5, 2.0})
        for (double t : {0.0, 1.0, 2.5}) EXPECT_NEAR(h.hf.M.interpolate(x, t), h.pc.M(x, t), 5e-3) << x << ' ' << t;
    EXPECT_NEAR(h.hf.M.interpolate(0.0, 0.0), 2.0, 5e-3);
}

TEST(Hedge, GAndHMatchClosedForm) {
    const auto& h = parabola_hedge();
    for (double x : {-1.0, 0.25, 1.75}) {
        EXPECT_NEAR(h.hf.H_at(x), h.pc.H(x), 5e-3);
        for (double t : {0.0, 1.0, 4.0}) EXPECT_NEAR(h.hf.G_at(x, t), h.pc.G(x, t), 5e-3);
    }
}

TEST(Hedge, PathwiseInequality) {
    const auto& h = parabola_hedge();
    const PathwiseReport r = verify_pathwise(h.hf, 1e-6);
    EXPECT_TRUE(r.pass) << r.max_gap << " at " << r.at_x << ", " << r.at_t;
    EXPECT_LT(r.max_contact_gap, 1e-6);
}

TEST(Hedge, MartingaleLadder) {
    const auto& h = parabola_hedge();
    SimulationConfig c;
    c.n_paths = 20000;
    c.dt = 2e-3;
    c.seed = 3;
    c.horizon = 8.0;
    const std::vector<double> ladder{0.5, 1.0, 2.0};
    const MartingaleReport r =
        verify_martingale(h.hf, DiffusionSpec::brownian(), h.barrier, Measure::dirac(0.0), ladder, c);
    EXPECT_TRUE(r.stopped_constant);
    EXPECT_TRUE(r.free_nondecreasing);
}

TEST(Hedge, IntervalCompetitorEmbedsTwoPoints) {
    SimulationConfig c;
    c.n_paths = 20000;
    c.dt = 1e-3;
    c.seed = 11;
    c.horizon = 50.0;
    const PathBatch b = simulate_randomized_interval(Measure::atoms({{-1.0, 0.5}, {1.0, 0.5}}), 0.0, 1, c);
    std::size_t up = 0;
    for (double x : b.stopped_values) {
        ASSERT_TRUE(x == 1.0 || x == -1.0);
        up += x > 0.0;
    }
    EXPECT_NEAR(static_cast<double>(up) / 20000.0, 0.5, 0.015);
    // Exit time of (-1, 1) from 0 has mean 1.
    const MeanSE tau = mean_se(b.stop_times);
    EXPECT_NEAR(tau.mean, 1.0, 3.0 * tau.se + 0.01);
}

TEST(Hedge, MeanSE) {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const MeanSE m = mean_se(v);
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_NEAR(m.se, std::sqrt(5.0 / 3.0 / 4.0), 1e-14);
}
