#include "rootbarrier/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rootbarrier/errors.hpp"
#include "rootbarrier/obstacle_solver.hpp"

namespace rootbarrier {

namespace {

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<CallQuote> sorted_curve(const MarketData& m) {
    std::vector<CallQuote> q = m.quotes;
    std::sort(q.begin(), q.end(), [](const CallQuote& a, const CallQuote& b) { return a.strike < b.strike; });
    if (q.empty() || q.front().strike > 0.0) q.insert(q.begin(), {0.0, m.spot});
    if (q.size() >= 2 && q.back().price > 0.0) {
        const auto& a = q[q.size() - 2];
        const auto& b = q.back();
        const double slope = (b.price - a.price) / (b.strike - a.strike);
        if (slope < 0.0) q.push_back({b.strike - b.price / slope, 0.0});
    }
    return q;
}

}  // namespace

// ---------------------------------------------------------------- market

double MarketData::call(double strike) const {
    if (strike <= 0.0) return spot - strike / growth();
    const auto q = sorted_curve(*this);
    if (strike >= q.back().strike) return 0.0;
    std::size_t k = 0;
    while (q[k + 1].strike < strike) ++k;
    const double w = (strike - q[k].strike) / (q[k + 1].strike - q[k].strike);
    return q[k].price + w * (q[k + 1].price - q[k].price);
}

double MarketData::put(double strike) const { return strike / growth() - spot + call(strike); }

Measure MarketData::implied_law() const { return implied_measure_from_calls(quotes, spot, growth()); }

void MarketData::validate() const {
    if (!(spot > 0.0) || !std::isfinite(spot)) throw InputError("spot must be positive");
    if (!(maturity > 0.0) || !std::isfinite(maturity)) throw InputError("maturity must be positive");
    rate.validate();
    if (quotes.empty()) throw MarketDataError("no call quotes");
}

double bs_call(double spot, double strike, double maturity, double vol, double growth) {
    const double fwd_disc = strike / growth;
    const double v = vol * vol * maturity;
    if (strike <= 0.0) return spot - fwd_disc;
    if (v <= 0.0) return std::max(spot - fwd_disc, 0.0);
    const double sd = std::sqrt(v);
    const double d1 = (std::log(spot / fwd_disc) + 0.5 * v) / sd;
    return spot * norm_cdf(d1) - fwd_disc * norm_cdf(d1 - sd);
}

MarketData bs_market(double spot, double maturity, double vol, RateCurve rate, std::span<const double> strikes) {
    MarketData m;
    m.spot = spot;
    m.maturity = maturity;
    m.rate = std::move(rate);
    const double B = m.growth();
    for (double k : strikes) m.quotes.push_back({k, bs_call(spot, k, maturity, vol, B)});
    return m;
}

// ---------------------------------------------------------------- static legs

StaticPortfolio static_portfolio(std::span<const double> knots, std::span<const double> H, double spot,
                                 double growth) {
    const std::size_t n = knots.size();
    if (n < 1 || H.size() != n) throw InputError("static portfolio needs matching knots and values");
    for (std::size_t k = 1; k < n; ++k)
        if (!(knots[k] > knots[k - 1])) throw InputError("static portfolio knots must increase");
    const auto it = std::find(knots.begin(), knots.end(), spot);
    if (it == knots.end()) throw InputError("static portfolio knots must include the spot");
    const auto s = static_cast<std::size_t>(it - knots.begin());

    StaticPortfolio p;
    p.spot = spot;
    p.growth = growth;
    p.knots.assign(knots.begin(), knots.end());
    p.values.assign(H.begin(), H.end());
    std::vector<double> slope(n > 1 ? n - 1 : 0);
    for (std::size_t k = 0; k + 1 < n; ++k) slope[k] = (H[k + 1] - H[k]) / (knots[k + 1] - knots[k]);
    const double right = n == 1 ? 0.0 : (s + 1 < n ? slope[s] : slope[n - 2]);
    p.forward_units = right / growth;
    p.cash = (H[s] - right * spot) / growth;
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double w = slope[k] - slope[k - 1];
        if (w == 0.0) continue;
        p.total_variation += std::abs(w);
        p.weights.push_back({growth * knots[k], w / growth, knots[k] > spot});
    }
    if (!std::isfinite(p.total_variation))
        throw InputError("static weights have unbounded total variation on the strike grid");
    return p;
}

double StaticPortfolio::payoff(double x) const {
    double v = growth * (cash + forward_units * x);
    for (const auto& w : weights) {
        const double k = w.strike / growth;
        v += growth * w.units * (w.call ? std::max(x - k, 0.0) : std::max(k - x, 0.0));
    }
    return v;
}

double StaticPortfolio::cost(const MarketData& market) const {
    double c = cash + forward_units * market.spot;
    for (const auto& w : weights) c += w.units * (w.call ? market.call(w.strike) : market.put(w.strike));
    return c;
}

// ---------------------------------------------------------------- bounds

double log_contract_price(const MarketData& market) {
    const double B = market.growth();
    const Measure mu = market.implied_law();
    if (!mu.positive_support()) throw MarketDataError("implied law reaches zero; log contract undefined");
    return (mu.log_moment() + std::log(B)) / B;
}

double variance_swap_price(const MarketData& market) {
    const double B = market.growth();
    const Measure mu = market.implied_law();
    if (!mu.positive_support()) throw MarketDataError("implied law reaches zero; log contract undefined");
    return -2.0 * (mu.log_moment() - std::log(market.spot)) / B;
}

HedgeReport lower_bound(const MarketData& market, const PayoffSpec& payoff, const PricingConfig& cfg) {
    market.validate();
    const double S0 = market.spot, B = market.growth();
    auto mu = std::make_shared<const Measure>(market.implied_law());
    const Measure nu = Measure::dirac(S0);
    const auto diff = DiffusionSpec::geometric();

    HedgeReport rep;
    rep.spot = S0;
    rep.growth = B;
    rep.maturity = market.maturity;
    rep.payoff = payoff;
    rep.target = mu;

    const auto atoms = mu->atom_list();
    std::shared_ptr<const Barrier> barrier;
    if (atoms.size() == 1) {
        // Degenerate law: stop at once.
        std::vector<double> y(5);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::log(S0) + 0.01 * (static_cast<double>(i) - 2.0);
        barrier = std::make_shared<const Barrier>(Barrier::constant(y, 0.0, true));
    } else {
        const double swap = -2.0 * (mu->log_moment() - std::log(S0));
        SolverConfig sc;
        sc.nx = cfg.nx;
        sc.nt = cfg.nt;
        sc.lambda = cfg.lambda;
        sc.lcp_tolerance = cfg.lcp_tolerance;
        sc.T = cfg.vi_horizon > 0.0 ? cfg.vi_horizon : 3.0 * swap;
        const EmbeddabilityReport emb = check_embeddable(nu, *mu);
        rep.diagnostics.embed_violation = emb.max_violation;
        for (int attempt = 0;; ++attempt) {
            const ObstacleSolution sol = solve(assemble(diff, nu, *mu, sc));
            Barrier b = extract_barrier(sol);
            // Every atom must meet the barrier within the horizon.
            const auto& y = b.state_grid();
            std::size_t missing = y.size();
            for (const Atom& a : atoms) {
                const double ya = std::log(a.location);
                const std::size_t k = bracket(y, ya);
                const bool near_k = std::isfinite(b.R()[k]) || (k + 1 < y.size() && std::isfinite(b.R()[k + 1]));
                if (!near_k) missing = k;
            }
            if (missing == y.size()) {
                rep.diagnostics.vi_residual = sol.max_residual;
                rep.diagnostics.vi_sweeps = sol.total_sweeps;
                rep.diagnostics.monotonicity_violations = b.monotonicity_violations();
                rep.diagnostics.vi_horizon = sc.T;
                barrier = std::make_shared<const Barrier>(std::move(b));
                break;
            }
            if (cfg.vi_horizon > 0.0 || attempt == 3) {
                std::ostringstream msg;
                msg << "barrier not reached at an atom within horizon " << sc.T << "; increase the horizon";
                throw SolverError(msg.str(), 0.0, missing);
            }
            sc.T *= 2.0;
        }
    }
    rep.barrier = barrier;

    HedgeConfig hc;
    hc.T_max = cfg.T_max;
    hc.nt = cfg.hedge_nt;
    hc.base_point = S0;
    hc.support = mu->support();
    auto hf = std::make_shared<HedgeFunctions>(build_hedge(diff, *barrier, payoff, hc));
    rep.diagnostics.T_max = hf->T_max();
    rep.diagnostics.truncated_nodes = hf->truncated_nodes;
    rep.diagnostics.pathwise_gap = verify_pathwise(*hf).max_gap;
    rep.g0 = hf->G_at(S0, 0.0);

    // Knots: the atoms of the implied law plus the spot.
    std::vector<double> knots;
    for (const Atom& a : atoms) knots.push_back(a.location);
    knots.push_back(S0);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    std::vector<double> Hk(knots.size());
    for (std::size_t k = 0; k < knots.size(); ++k) Hk[k] = hf->H_at(knots[k]);
    rep.portfolio = static_portfolio(knots, Hk, S0, B);
    rep.lower_bound = rep.g0 / B + rep.portfolio.cost(market);
    double EH = 0.0;
    for (const Atom& a : atoms) EH += a.mass * hf->H_at(a.location);
    rep.cross_check = (rep.g0 + EH) / B;
    rep.hedge = std::move(hf);
    return rep;
}

ConcaveBound upper_bound_concave(const MarketData& market, const PayoffSpec& payoff, const PricingConfig& cfg) {
    if (!payoff.bounded()) throw InputError("concave bound needs a bounded f");
    ConcaveBound c;
    c.f_inf = payoff.f_bound();
    c.log_contract = log_contract_price(market);
    const double B = market.growth();
    c.swap = -2.0 * c.log_contract + 2.0 * (std::log(market.spot) + std::log(B)) / B;
    c.lower_of_F = lower_bound(market, payoff, cfg).lower_bound;
    c.upper = c.f_inf * c.swap - c.lower_of_F;
    return c;
}

double subhedge_allowance(const HedgeReport& report, double sim_dt) {
    if (!report.hedge) throw InputError("hedge report is incomplete");
    const HedgeFunctions& hf = *report.hedge;
    const double dt_hedge = hf.t.size() > 1 ? hf.t[1] - hf.t[0] : 0.0;
    const double lo = report.portfolio.knots.front(), hi = report.portfolio.knots.back();
    double static_excess = 0.0;
    for (std::size_t i = 0; i < hf.x.size(); ++i)
        if (hf.x[i] >= lo && hf.x[i] <= hi)
            static_excess = std::max(static_excess, report.portfolio.payoff(hf.x[i]) - hf.H[i]);
    return hf.payoff.f(hf.T_max()) * std::max(sim_dt, dt_hedge) + static_excess;
}

SubhedgeReport verify_subhedge(const HedgeReport& report, const PriceModel& model, const SimulationConfig& cfg,
                               double allowance) {
    if (!report.hedge) throw InputError("hedge report is incomplete");
    const HedgeFunctions& hf = *report.hedge;
    const HoldingFn phi = [&hf](double x, double tau) { return hf.delta_at(x, tau); };
    const PathBatch b = simulate_price_model(model, cfg, &phi);
    const double B = report.growth;

    SubhedgeReport rep;
    rep.n_paths = b.n_paths;
    rep.allowance = allowance;
    rep.lower_bound = report.lower_bound;
    rep.max_excess = -std::numeric_limits<double>::infinity();
    std::vector<double> port, pay, terminal;
    std::size_t ok = 0, aborted = 0;
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        if (b.aborted[p]) {
            ++aborted;
            continue;
        }
        const double value = report.g0 + b.hedge_gains[p] + report.portfolio.payoff(b.stopped_values[p]);
        const double claim = report.payoff.F(b.realized_variance[p]);
        rep.max_excess = std::max(rep.max_excess, value - claim);
        if (value <= claim + allowance) ++ok;
        port.push_back(value / B);
        terminal.push_back(b.stopped_values[p]);
        pay.push_back(claim / B);
    }
    const MeanSE mp = mean_se(port), mf = mean_se(pay);
    rep.mean_portfolio = mp.mean;
    rep.se_portfolio = mp.se;
    rep.mean_payoff = mf.mean;
    rep.se_payoff = mf.se;
    rep.aborted_fraction = static_cast<double>(aborted) / static_cast<double>(b.n_paths);
    const std::size_t used = b.n_paths - aborted;
    if (report.target && !terminal.empty()) {
        rep.ks = ks_statistic(terminal, *report.target);
        rep.ks_critical = ks_critical_1pct(terminal.size());
    }
    rep.fraction_ok = used ? static_cast<double>(ok) / static_cast<double>(used) : 0.0;
    rep.tight = std::abs(rep.mean_portfolio - rep.lower_bound) <= 3.0 * rep.se_portfolio + 1e-12;
    rep.pass = rep.fraction_ok >= 0.99;
    return rep;
}

}  // namespace rootbarrier
