#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rootbarrier/errors.hpp"
#include "rootbarrier/measures.hpp"

using namespace rootbarrier;

namespace {

double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double Phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

TEST(Measure, NormalPotentialMatchesClosedForm) {
    const double s = 1.3, m = 0.4;
    const Measure n = Measure::normal(m, s * s);
    for (double x : {-3.0, -0.5, 0.4, 1.0, 5.0}) {
        const double z = (x - m) / s;
        const double expected = 2.0 * s * phi(z) + (x - m) * (2.0 * Phi(z) - 1.0);
        EXPECT_NEAR(n.abs_moment(x), expected, 1e-10) << x;
    }
}

TEST(Measure, AtomicPotentialByHand) {
    const Measure a = Measure::atoms({{-1.0, 0.25}, {2.0, 0.75}});
    EXPECT_DOUBLE_EQ(a.mean(), 1.25);
    // E|Y - 0| = 0.25 + 1.5
    EXPECT_DOUBLE_EQ(a.abs_moment(0.0), 1.75);
    EXPECT_DOUBLE_EQ(a.abs_moment(5.0), 5.0 - 1.25);
    EXPECT_DOUBLE_EQ(a.cdf(-1.0), 0.25);
    EXPECT_DOUBLE_EQ(a.cdf_below(-1.0), 0.0);
    EXPECT_DOUBLE_EQ(a.quantile(0.5), 2.0);
    EXPECT_DOUBLE_EQ(a.partial_first_moment(2.0), -0.25);
}

TEST(Measure, EmpiricalMergesDuplicates) {
    const Measure e = Measure::empirical({1.0, 3.0, 1.0, 2.0});
    ASSERT_EQ(e.atom_list().size(), 3u);
    EXPECT_DOUBLE_EQ(e.atom_list()[0].mass, 0.5);
    EXPECT_DOUBLE_EQ(e.mean(), 1.75);
}

TEST(Measure, TabulatedUniform) {
    const Measure u = Measure::tabulated({{0.0, 1.0}, {0.5, 1.0}, {1.0, 1.0}});
    EXPECT_NEAR(u.mean(), 0.5, 1e-12);
    EXPECT_NEAR(u.variance(), 1.0 / 12.0, 1e-9);
    EXPECT_NEAR(u.cdf(0.3), 0.3, 1e-12);
    // E|U - x| = (x^2 + (1 - x)^2) / 2
    EXPECT_NEAR(u.abs_moment(0.3), (0.09 + 0.49) / 2.0, 1e-12);
    EXPECT_THROW(Measure::tabulated({{0.0, 1.0}, {1.0, 3.0}}), InputError);
}

TEST(Measure, LognormalMoments) {
    const Measure l = Measure::lognormal(-0.02, 0.04);
    EXPECT_NEAR(l.mean(), 1.0, 1e-12);
    EXPECT_NEAR(l.variance(), std::exp(0.04) - 1.0, 1e-9);
    EXPECT_NEAR(l.log_moment(), -0.02, 1e-8);
}

TEST(Measure, DiscretisationKeepsMean) {
    const Measure n = Measure::normal(0.7, 2.0);
    const Measure d = n.discretized(500);
    EXPECT_EQ(d.atom_list().size(), 500u);
    EXPECT_NEAR(d.mean(), 0.7, 1e-10);
    EXPECT_LT(d.variance(), 2.0);
    EXPECT_GT(d.variance(), 1.95);
}

TEST(Embeddable, PointMassIntoNormal) {
    EXPECT_TRUE(check_embeddable(Measure::dirac(0.0), Measure::normal(0.0, 1.0)).pass);
}

TEST(Embeddable, RejectsReversedOrderAndShiftedMean) {
    const auto rev = check_embeddable(Measure::normal(0.0, 1.0), Measure::dirac(0.0));
    EXPECT_FALSE(rev.pass);
    EXPECT_GT(rev.max_violation, 0.5);
    const auto shifted = check_embeddable(Measure::dirac(0.0), Measure::normal(0.1, 1.0));
    EXPECT_FALSE(shifted.pass);
    EXPECT_FALSE(shifted.means_equal);
}

TEST(Embeddable, NestedNormals) {
    EXPECT_TRUE(check_embeddable(Measure::normal(0.0, 0.5), Measure::normal(0.0, 1.0)).pass);
    EXPECT_FALSE(check_embeddable(Measure::normal(0.0, 1.0), Measure::normal(0.0, 0.5)).pass);
}

TEST(ImpliedLaw, BinaryCallCurveGivesTwoAtoms) {
    // Law 1/2 at 80, 1/2 at 120: C(K) = E (Y - K)+ evaluated directly.
    auto C = [](double K) { return 0.5 * std::max(80.0 - K, 0.0) + 0.5 * std::max(120.0 - K, 0.0); };
    std::vector<CallQuote> q;
    for (double K : {0.0, 80.0, 120.0, 150.0}) q.push_back({K, C(K)});
    const Measure m = implied_measure_from_calls(q, 100.0, 1.0);
    double mass80 = 0.0, mass120 = 0.0;
    for (const Atom& a : m.atom_list()) {
        if (std::abs(a.location - 80.0) < 1e-9) mass80 += a.mass;
        if (std::abs(a.location - 120.0) < 1e-9) mass120 += a.mass;
    }
    EXPECT_NEAR(mass80, 0.5, 1e-12);
    EXPECT_NEAR(mass120, 0.5, 1e-12);
    EXPECT_NEAR(m.mean(), 100.0, 1e-9);
}

TEST(ImpliedLaw, GrowthScalesAtoms) {
    auto C = [](double K) { return 0.5 * std::max(80.0 - K, 0.0) + 0.5 * std::max(120.0 - K, 0.0); };
    // Money strikes are B K; the discounted law is unchanged.
    const double B = 1.05;
    std::vector<CallQuote> q;
    for (double K : {0.0, 80.0, 120.0, 150.0}) q.push_back({B * K, C(K) });
    const Measure m = implied_measure_from_calls(q, 100.0, B);
    EXPECT_NEAR(m.mean(), 100.0, 1e-9);
}

TEST(KS, QuantileSamplesAreClose) {
    const Measure n = Measure::normal(0.0, 1.0);
    std::vector<double> s;
    const std::size_t N = 2000;
    for (std::size_t i = 0; i < N; ++i) s.push_back(n.quantile((static_cast<double>(i) + 0.5) / N));
    EXPECT_NEAR(ks_statistic(s, n), 0.5 / N, 1e-6);
    EXPECT_NEAR(ks_critical_1pct(10000), 1.6276 / 100.0, 2e-4);
}

TEST(KS, TwoSampleDisjoint) {
    EXPECT_DOUBLE_EQ(ks_statistic(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5}), 1.0);
}
