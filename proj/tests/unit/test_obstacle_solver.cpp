#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "rootbarrier/errors.hpp"
#include "rootbarrier/obstacle_solver.hpp"

using namespace rootbarrier;

namespace {

SolverConfig small(std::size_t nx, std::size_t nt, double T) {
    SolverConfig c;
    c.nx = nx;
    c.nt = nt;
    c.T = T;
    return c;
}

}  // namespace

TEST(Solver, InitialAndObstacleMatchPotentials) {
    const Measure nu = Measure::dirac(0.0), mu = Measure::normal(0.0, 1.0);
    const DiscreteProblem p = assemble(DiffusionSpec::brownian(), nu, mu, small(101, 50, 1.0));
    for (std::size_t i = 0; i < p.grid.y.size(); ++i) {
        EXPECT_NEAR(p.initial[i], nu.potential_at(p.grid.y[i]), 1e-12);
        EXPECT_NEAR(p.psi[i], mu.potential_at(p.grid.y[i]), 1e-12);
    }
}

TEST(Solver, SolutionStaysAboveObstacleAndDecreases) {
    const ObstacleSolution sol = solve(
        assemble(DiffusionSpec::brownian(), Measure::dirac(0.0), Measure::normal(0.0, 1.0), small(201, 200, 2.0)));
    EXPECT_LT(sol.max_residual, 1e-6);
    for (std::size_t j = 0; j < sol.t.size(); ++j)
        for (std::size_t i = 0; i < sol.grid.y.size(); ++i) {
            EXPECT_GE(sol.v(i, j), sol.psi[i] - 1e-9);
            if (j > 0) EXPECT_LE(sol.v(i, j), sol.v(i, j - 1) + 1e-9);
        }
}

TEST(Solver, AgreesWithStoppingOracle) {
    const DiffusionSpec bm = DiffusionSpec::brownian();
    const Measure nu = Measure::dirac(0.0), mu = Measure::normal(0.0, 1.0);
    const SolverConfig c = small(201, 400, 1.5);
    const ObstacleSolution sol = solve(assemble(bm, nu, mu, c));
    const GridFunction dp = optimal_stopping_oracle(bm, nu, mu, c);
    double worst = 0.0;
    for (std::size_t i = 0; i < sol.grid.y.size(); ++i)
        for (double t : {0.25, 0.75, 1.5}) {
            const auto j = static_cast<std::size_t>(std::lround(t / c.T * static_cast<double>(c.nt)));
            worst = std::max(worst, std::abs(sol.v(i, j) - dp.interpolate(sol.grid.y[i], t)));
        }
    EXPECT_LT(worst, 2e-2);
}

TEST(Solver, CrankNicolsonCloseToImplicit) {
    const DiffusionSpec bm = DiffusionSpec::brownian();
    SolverConfig c = small(201, 400, 2.0);
    const Measure nu = Measure::dirac(0.0), mu = Measure::atoms({{-1.0, 0.5}, {1.0, 0.5}});
    const ObstacleSolution a = solve(assemble(bm, nu, mu, c));
    c.scheme = TimeScheme::crank_nicolson_projected;
    const ObstacleSolution b = solve(assemble(bm, nu, mu, c));
    double worst = 0.0;
    for (std::size_t k = 0; k < a.v.data().size(); ++k) worst = std::max(worst, std::abs(a.v.data()[k] - b.v.data()[k]));
    EXPECT_LT(worst, 1e-2);
}

TEST(Solver, GeometricNeedsLambdaAboveHalf) {
    SolverConfig c = small(101, 50, 0.1);
    c.lambda = 0.4;
    EXPECT_THROW((void)assemble(DiffusionSpec::geometric(), Measure::dirac(1.0), Measure::lognormal(-0.02, 0.04), c),
                 InputError);
}

TEST(Solver, RejectsNonEmbeddablePair) {
    EXPECT_THROW(
        (void)assemble(DiffusionSpec::brownian(), Measure::normal(0.0, 1.0), Measure::dirac(0.0), small(101, 50, 1.0)),
        InputError);
}

TEST(Solver, SnapsGridToAtoms) {
    SolverConfig c = small(100, 50, 1.0);
    c.x_range = Interval{-2.0, 2.0};
    const DiscreteProblem p =
        assemble(DiffusionSpec::brownian(), Measure::dirac(0.0), Measure::atoms({{-0.77, 0.5}, {0.77, 0.5}}), c);
    auto has = [&](double a) {
        return std::any_of(p.grid.y.begin(), p.grid.y.end(), [&](double y) { return std::abs(y - a) < 1e-14; });
    };
    EXPECT_TRUE(has(0.0));
    EXPECT_TRUE(has(-0.77));
    EXPECT_TRUE(has(0.77));
}

TEST(Solver, UnreachableToleranceRaisesSolverError) {
    SolverConfig c = small(101, 20, 1.0);
    c.lcp_tolerance = 1e-300;
    c.max_iterations = 50;
    EXPECT_THROW((void)solve(assemble(DiffusionSpec::brownian(), Measure::dirac(0.0), Measure::normal(0.0, 1.0), c)),
                 SolverError);
}
