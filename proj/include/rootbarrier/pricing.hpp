#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "rootbarrier/barrier.hpp"
#include "rootbarrier/measures.hpp"
#include "rootbarrier/optimality.hpp"
#include "rootbarrier/simulate.hpp"

namespace rootbarrier {

/// Spot, deterministic rate curve and a call curve at one maturity.
struct MarketData {
    double spot = 1.0;
    double maturity = 1.0;
    RateCurve rate;
    std::vector<CallQuote> quotes;

    /// B_T.
    [[nodiscard]] double growth() const { return rate.growth(maturity); }
    /// Call price, linear between quotes, C(0) = spot.
    [[nodiscard]] double call(double strike) const;
    /// Put price by parity P(K) = K / B_T - S_0 + C(K).
    [[nodiscard]] double put(double strike) const;
    /// Law of S_T / B_T implied by the quotes.
    [[nodiscard]] Measure implied_law() const;
    void validate() const;
};

/// Black-Scholes call with total variance vol^2 T and growth B_T.
[[nodiscard]] double bs_call(double spot, double strike, double maturity, double vol, double growth);

/// Quotes from a constant-volatility model on the given strikes.
[[nodiscard]] MarketData bs_market(double spot, double maturity, double vol, RateCurve rate,
                                   std::span<const double> strikes);

struct StrikeWeight {
    /// Money strike B_T K.
    double strike;
    /// Number of options held.
    double units;
    bool call;
};

/// Static position replicating H(S_T / B_T), paid at T.
struct StaticPortfolio {
    double spot = 1.0;
    double growth = 1.0;
    /// Present value held in the bond.
    double cash = 0.0;
    /// Shares of the asset.
    double forward_units = 0.0;
    std::vector<StrikeWeight> weights;
    double total_variation = 0.0;
    /// Knots (discounted price) and H there.
    std::vector<double> knots;
    std::vector<double> values;

    /// Terminal payoff of the position when S_T / B_T = x.
    [[nodiscard]] double payoff(double x) const;
    /// Cost at the quotes.
    [[nodiscard]] double cost(const MarketData& market) const;
};

/// Slope jumps of the piecewise-linear interpolant of H through the knots.
/// The spot must be one of the knots; H continues linearly outside them.
[[nodiscard]] StaticPortfolio static_portfolio(std::span<const double> knots, std::span<const double> H,
                                               double spot, double growth);

struct PricingConfig {
    std::size_t nx = 801;
    std::size_t nt = 1200;
    double lambda = 1.0;
    /// Horizon of the variational inequality; 0 picks three times the swap variance.
    double vi_horizon = 0.0;
    double lcp_tolerance = 1e-8;
    std::size_t hedge_nt = 2000;
    /// Horizon of M; 0 picks four times the largest barrier value.
    double T_max = 0.0;
};

struct HedgeReport {
    double lower_bound = 0.0;
    /// B_T^{-1} (G(S_0, 0) + E H(X_T)) evaluated directly against the implied law.
    double cross_check = 0.0;
    double g0 = 0.0;
    double spot = 1.0;
    double growth = 1.0;
    double maturity = 1.0;
    StaticPortfolio portfolio;
    std::shared_ptr<const HedgeFunctions> hedge;
    std::shared_ptr<const Barrier> barrier;
    std::shared_ptr<const Measure> target;
    PayoffSpec payoff;

    struct Diagnostics {
        double vi_residual = 0.0;
        std::size_t vi_sweeps = 0;
        std::size_t monotonicity_violations = 0;
        double vi_horizon = 0.0;
        double T_max = 0.0;
        double pathwise_gap = 0.0;
        double embed_violation = 0.0;
        std::size_t truncated_nodes = 0;
    } diagnostics;

    /// Shares held at (X_t, realised variance so far).
    [[nodiscard]] double dynamic_delta(double x, double tau) const { return hedge->delta_at(x, tau) / growth; }
};

/// Model-independent lower bound on the price of F(realised variance) paid at T.
[[nodiscard]] HedgeReport lower_bound(const MarketData& market, const PayoffSpec& payoff,
                                      const PricingConfig& cfg = {});

/// Price of the log contract paying ln S_T at T.
[[nodiscard]] double log_contract_price(const MarketData& market);
/// Model-free price of realised variance paid at T: -2 B_T^{-1} E ln(X_T / S_0).
[[nodiscard]] double variance_swap_price(const MarketData& market);

struct ConcaveBound {
    double upper = 0.0;
    double f_inf = 0.0;
    double swap = 0.0;
    double log_contract = 0.0;
    double lower_of_F = 0.0;
};

/// Upper bound on the price of L(t) = f(inf) t - F(t), from the lower bound on F.
[[nodiscard]] ConcaveBound upper_bound_concave(const MarketData& market, const PayoffSpec& payoff,
                                               const PricingConfig& cfg = {});

/// Discretisation slack for the pathwise check: sup f times the coarser of the
/// simulation step and the time step of the tabulated hedge, plus the largest
/// amount by which the static legs exceed H on the hedge grid.
[[nodiscard]] double subhedge_allowance(const HedgeReport& report, double sim_dt);

struct SubhedgeReport {
    std::size_t n_paths = 0;
    double allowance = 0.0;
    double fraction_ok = 0.0;
    double max_excess = 0.0;
    /// Present value of the terminal portfolio and of the payoff.
    double mean_portfolio = 0.0, se_portfolio = 0.0;
    double mean_payoff = 0.0, se_payoff = 0.0;
    double lower_bound = 0.0;
    double aborted_fraction = 0.0;
    /// KS distance of the terminal discounted price from the implied law.
    double ks = 0.0, ks_critical = 0.0;
    bool tight = false;
    bool pass = false;
};

/// Marks static legs plus the dynamic account along simulated paths of
/// `model` and checks portfolio <= F(realised variance) + allowance.
[[nodiscard]] SubhedgeReport verify_subhedge(const HedgeReport& report, const PriceModel& model,
                                             const SimulationConfig& cfg, double allowance);

}  // namespace rootbarrier
