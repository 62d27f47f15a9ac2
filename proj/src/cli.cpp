#include "rootbarrier/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "rootbarrier/errors.hpp"
#include "rootbarrier/io.hpp"
#include "rootbarrier/parabola.hpp"

namespace rootbarrier {

namespace {

using io::json;
namespace fs = std::filesystem;

struct Global {
    std::string config;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    bool quiet = false;
};

struct SolverFlags {
    std::size_t nx = 401;
    std::size_t nt = 800;
    double T = 2.0;
    double lambda = 1.0;
    std::string scheme = "implicit";
    double lcp_tol = 1e-8;
    double x_min = NAN, x_max = NAN;

    void add(CLI::App* c) {
        c->add_option("--nx", nx, "grid nodes")->check(CLI::Range(std::size_t{5}, std::size_t{1} << 24));
        c->add_option("--nt", nt, "time steps")->check(CLI::PositiveNumber);
        c->add_option("--T", T, "solver horizon")->check(CLI::PositiveNumber);
        c->add_option("--lambda", lambda, "weight exponent of the solver norm");
        c->add_option("--scheme", scheme, "implicit | cn")->check(CLI::IsMember({"implicit", "cn"}));
        c->add_option("--lcp-tol", lcp_tol, "relative complementarity tolerance");
        c->add_option("--x-min", x_min, "lower end of the grid (natural coordinate)");
        c->add_option("--x-max", x_max, "upper end of the grid (natural coordinate)");
    }

    [[nodiscard]] SolverConfig config() const {
        SolverConfig c;
        c.nx = nx;
        c.nt = nt;
        c.T = T;
        c.lambda = lambda;
        c.scheme = scheme == "cn" ? TimeScheme::crank_nicolson_projected : TimeScheme::implicit_projected;
        c.lcp_tolerance = lcp_tol;
        if (std::isfinite(x_min) != std::isfinite(x_max)) throw InputError("give both --x-min and --x-max");
        if (std::isfinite(x_min)) c.x_range = Interval{x_min, x_max};
        return c;
    }
};

struct PricingFlags {
    std::string quotes;
    std::string market;
    std::string payoff = "swap";
    std::size_t nx = 801;
    std::size_t nt = 1200;
    double lambda = 1.0;
    double vi_horizon = 0.0;
    std::size_t hedge_nt = 2000;
    double T_max = 0.0;
    double lcp_tol = 1e-8;

    void add(CLI::App* c) {
        c->add_option("--quotes", quotes, "call quotes CSV (strike,price)")->required();
        c->add_option("--market", market, "market sidecar JSON (default: quotes path with .json)");
        c->add_option("--payoff", payoff, "swap | varcall:K | power:p[,scale] | table:FILE");
        c->add_option("--nx", nx, "grid nodes")->check(CLI::Range(std::size_t{5}, std::size_t{1} << 24));
        c->add_option("--nt", nt, "solver time steps")->check(CLI::PositiveNumber);
        c->add_option("--lambda", lambda, "weight exponent of the solver norm");
        c->add_option("--vi-horizon", vi_horizon, "solver horizon (0: automatic)");
        c->add_option("--hedge-nt", hedge_nt, "time steps for M")->check(CLI::PositiveNumber);
        c->add_option("--T-max", T_max, "horizon of M (0: automatic)");
        c->add_option("--lcp-tol", lcp_tol, "relative complementarity tolerance");
    }

    [[nodiscard]] PricingConfig config() const {
        PricingConfig c;
        c.nx = nx;
        c.nt = nt;
        c.lambda = lambda;
        c.vi_horizon = vi_horizon;
        c.hedge_nt = hedge_nt;
        c.T_max = T_max;
        c.lcp_tolerance = lcp_tol;
        return c;
    }

    [[nodiscard]] MarketData load() const {
        fs::path side = market.empty() ? fs::path(quotes).replace_extension(".json") : fs::path(market);
        return io::read_market(quotes, side);
    }
};

std::vector<double> split_numbers(const std::string& s, char sep) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InputError("not a number: '" + item + "' in '" + s + "'");
        }
    }
    return out;
}

DiffusionSpec parse_diffusion(const std::string& s) {
    const auto colon = s.find(':');
    const std::string head = s.substr(0, colon);
    const std::string tail = colon == std::string::npos ? "" : s.substr(colon + 1);
    if (head == "bm") return DiffusionSpec::brownian(tail.empty() ? 1.0 : split_numbers(tail, ',').at(0));
    if (head == "gbm") return DiffusionSpec::geometric();
    if (head == "tanh") {
        const auto p = split_numbers(tail, ',');
        if (p.size() != 2) throw InputError("tanh diffusion needs tanh:s0,s1");
        return DiffusionSpec::tanh_local(p[0], p[1]);
    }
    throw InputError("unknown diffusion '" + s + "' (bm[:scale] | gbm | tanh:s0,s1)");
}

PayoffSpec parse_payoff(const std::string& s) {
    const auto colon = s.find(':');
    const std::string head = s.substr(0, colon);
    const std::string tail = colon == std::string::npos ? "" : s.substr(colon + 1);
    if (head == "swap") return PayoffSpec::variance_swap();
    if (head == "varcall") return PayoffSpec::variance_call(split_numbers(tail, ',').at(0));
    if (head == "power") {
        const auto p = split_numbers(tail, ',');
        if (p.empty()) throw InputError("power payoff needs power:p[,scale]");
        return PayoffSpec::power(p[0], p.size() > 1 ? p[1] : 1.0);
    }
    if (head == "table") {
        std::ifstream in(tail);
        if (!in) throw InputError("cannot open " + tail);
        std::string line;
        std::getline(in, line);
        std::vector<double> t, f;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto v = split_numbers(line, ',');
            if (v.size() != 2) throw InputError("payoff table rows must be t,f in " + tail);
            t.push_back(v[0]);
            f.push_back(v[1]);
        }
        return PayoffSpec::custom_table(t, f);
    }
    throw InputError("unknown payoff '" + s + "' (swap | varcall:K | power:p[,scale] | table:FILE)");
}

PriceModel parse_model(const std::string& s, const MarketData& m, const std::shared_ptr<const Barrier>& barrier) {
    const auto colon = s.find(':');
    const std::string head = s.substr(0, colon);
    const std::string tail = colon == std::string::npos ? "" : s.substr(colon + 1);
    if (head == "constant") return PriceModel::constant_vol(m.spot, m.maturity, split_numbers(tail, ',').at(0), m.rate);
    if (head == "piecewise") {
        // piecewise:t0/v0,t1/v1,...
        std::vector<double> times, vols;
        std::stringstream ss(tail);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto tv = split_numbers(item, '/');
            if (tv.size() != 2) throw InputError("piecewise model entries are time/vol");
            times.push_back(tv[0]);
            vols.push_back(tv[1]);
        }
        return PriceModel::piecewise_vol(m.spot, m.maturity, times, vols, m.rate);
    }
    if (head == "time-change") return PriceModel::time_change(m.spot, m.maturity, barrier, m.rate);
    throw InputError("unknown model '" + s + "' (constant:vol | piecewise:t/v,... | time-change)");
}

/// Applies config-file keys on top of parsed flags; the file wins conflicts.
void apply_config(CLI::App& app, CLI::App* sub, const json& cfg, std::ostream& err) {
    if (!cfg.is_object()) throw InputError("config file must hold a JSON object");
    for (const auto& [key, value] : cfg.items()) {
        if (key == "config") continue;
        CLI::Option* opt = sub ? sub->get_option_no_throw("--" + key) : nullptr;
        if (!opt) opt = app.get_option_no_throw("--" + key);
        if (!opt) throw InputError("unknown config key '" + key + "'");
        std::vector<std::string> vals;
        auto text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
        if (value.is_array())
            for (const auto& v : value) vals.push_back(text(v));
        else
            vals.push_back(text(value));
        if (opt->count() > 0 && opt->results() != vals) {
            std::string given;
            for (const auto& r : opt->results()) given += (given.empty() ? "" : " ") + r;
            err << "warning: config sets --" << key << " = " << value.dump() << ", overriding command line '" << given
                << "'\n";
        }
        opt->clear();
        for (const auto& v : vals) opt->add_result(v);
        opt->run_callback();
    }
}

struct Context {
    Global g;
    std::ostream& out;
    std::ostream& err;
    [[nodiscard]] fs::path path(const std::string& name) const { return fs::path(g.out_dir) / name; }
    void say(const std::string& line) const {
        if (!g.quiet) out << line << '\n';
    }
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(8);
    s << v;
    return s.str();
}

Measure load_nu(const std::string& path, const DiffusionSpec& diff) {
    if (!path.empty()) return io::read_measure(path);
    return Measure::dirac(diff.is_geometric() ? 1.0 : 0.0);
}

// ---------------------------------------------------------------- commands

struct SolveArgs {
    std::string nu, mu, sigma = "bm";
    SolverFlags solver;
    std::size_t simulate = 0;
    double dt = 1e-3;
    double horizon = 0.0;
    bool dump_paths = false;
};

int cmd_solve_barrier(const Context& c, const SolveArgs& a) {
    const DiffusionSpec diff = parse_diffusion(a.sigma);
    const Measure nu = load_nu(a.nu, diff);
    const Measure mu = io::read_measure(a.mu);
    const SolverConfig cfg = a.solver.config();
    const ObstacleSolution sol = solve(assemble(diff, nu, mu, cfg));
    const Barrier barrier = extract_barrier(sol);
    io::write_barrier(barrier, c.path("barrier.csv"), c.path("barrier.json"));
    io::write_solution(sol, c.path("solution.csv"), c.path("solution.json"));
    c.say("solve-barrier: max residual " + fmt(sol.max_residual) + ", " + std::to_string(sol.total_sweeps) +
          " sweeps, barrier written to " + c.path("barrier.csv").string());
    if (a.simulate > 0) {
        SimulationConfig sc;
        sc.n_paths = a.simulate;
        sc.dt = a.dt;
        sc.seed = c.g.seed;
        sc.horizon = a.horizon > 0.0 ? a.horizon : cfg.T;
        const PathBatch b = simulate_stopped(diff, nu, barrier, sc);
        const json summary = io::batch_summary(b, &mu);
        io::write_json(c.path("batch.json"), summary);
        if (a.dump_paths) io::write_paths_csv(b, c.path("paths.csv"));
        c.say("simulated " + std::to_string(b.n_paths) + " paths: KS " +
              fmt(summary["ks_statistics"]["statistic"].get<double>()) + " (1% critical " +
              fmt(summary["ks_statistics"]["critical_1pct"].get<double>()) + "), horizon mass " +
              fmt(b.horizon_mass()));
        if (b.horizon_warning()) c.err << "warning: more than 1% of paths reached the horizon\n";
    }
    return exit_ok;
}

int cmd_verify_embed(const Context& c, const SolveArgs& a) {
    const DiffusionSpec diff = parse_diffusion(a.sigma);
    const Measure nu = load_nu(a.nu, diff);
    const Measure mu = io::read_measure(a.mu);
    const EmbeddabilityReport rep = check_embeddable(nu, mu);
    json j = {{"potential_order", rep.pass}, {"max_violation", rep.max_violation}, {"at_x", rep.at_x},
              {"mean_gap", rep.mean_gap}, {"means_equal", rep.means_equal}};
    if (rep.pass && a.simulate > 0) {
        const SolverConfig cfg = a.solver.config();
        const ObstacleSolution sol = solve(assemble(diff, nu, mu, cfg));
        const Barrier barrier = extract_barrier(sol);
        SimulationConfig sc;
        sc.n_paths = a.simulate;
        sc.dt = a.dt;
        sc.seed = c.g.seed;
        sc.horizon = a.horizon > 0.0 ? a.horizon : cfg.T;
        const PathBatch b = simulate_stopped(diff, nu, barrier, sc);
        j["simulation"] = io::batch_summary(b, &mu);
        j["simulation"]["ks_pass"] = j["simulation"]["ks_statistics"]["statistic"].get<double>() <=
                                     j["simulation"]["ks_statistics"]["critical_1pct"].get<double>();
    }
    io::write_json(c.path("embed.json"), j);
    if (!rep.pass) {
        std::ostringstream msg;
        msg << "target is not embeddable: U_mu exceeds U_nu by " << rep.max_violation << " at x = " << rep.at_x
            << (rep.means_equal ? "" : " (means differ)");
        throw InputError(msg.str());
    }
    c.say("verify-embed: potentials ordered" +
          (j.contains("simulation") ? std::string(", KS ") +
                                          fmt(j["simulation"]["ks_statistics"]["statistic"].get<double>())
                                    : std::string()));
    return exit_ok;
}

struct PriceArgs {
    PricingFlags pricing;
    bool upper = false;
    // hedge-report only
    std::vector<std::string> models{"constant:0.2"};
    std::size_t paths = 10000;
    double dt = 1e-3;
    double tc_dt = 1e-5;
    double tc_horizon = 0.0;
    double allowance = -1.0;
};

void write_price_outputs(const Context& c, const HedgeReport& rep) {
    io::write_barrier(*rep.barrier, c.path("barrier.csv"), c.path("barrier.json"));
    const HedgeFunctions& hf = *rep.hedge;
    std::ofstream surf(c.path("gh_surface.csv"));
    surf << "x,t,G_plus_H_minus_F\n";
    const std::size_t sx = std::max<std::size_t>(1, hf.x.size() / 200), st = std::max<std::size_t>(1, hf.t.size() / 200);
    for (std::size_t j = 0; j < hf.t.size(); j += st)
        for (std::size_t i = 0; i < hf.x.size(); i += sx)
            surf << io::num(hf.x[i]) << ',' << io::num(hf.t[j]) << ','
                 << io::num(hf.G(i, j) + hf.H[i] - hf.payoff.F(hf.t[j])) << '\n';
    std::ofstream h(c.path("H.csv"));
    h << "x,H\n";
    for (std::size_t i = 0; i < hf.x.size(); ++i) h << io::num(hf.x[i]) << ',' << io::num(hf.H[i]) << '\n';
}

int cmd_price_bound(const Context& c, const PriceArgs& a) {
    const MarketData m = a.pricing.load();
    const PayoffSpec payoff = parse_payoff(a.pricing.payoff);
    fs::create_directories(c.g.out_dir);
    const HedgeReport rep = lower_bound(m, payoff, a.pricing.config());
    json j = io::hedge_report_json(rep);
    if (payoff.kind() == PayoffSpec::Kind::power && payoff.f_bound() == 1.0)
        j["diagnostics"]["log_contract_swap"] = variance_swap_price(m);
    if (a.upper) {
        const ConcaveBound cb = upper_bound_concave(m, payoff, a.pricing.config());
        j["concave_upper_bound"] = {{"upper", cb.upper}, {"f_inf", cb.f_inf}, {"swap", cb.swap},
                                    {"log_contract", cb.log_contract}};
    }
    io::write_json(c.path("report.json"), j);
    write_price_outputs(c, rep);
    c.say("price-bound: lower bound " + fmt(rep.lower_bound) + " for " + payoff.describe());
    return exit_ok;
}

int cmd_hedge_report(const Context& c, const PriceArgs& a) {
    const MarketData m = a.pricing.load();
    const PayoffSpec payoff = parse_payoff(a.pricing.payoff);
    fs::create_directories(c.g.out_dir);
    const HedgeReport rep = lower_bound(m, payoff, a.pricing.config());
    json j = io::hedge_report_json(rep);
    j["models"] = json::array();
    for (const std::string& spec : a.models) {
        const PriceModel model = parse_model(spec, m, rep.barrier);
        SimulationConfig sc;
        sc.n_paths = a.paths;
        sc.seed = c.g.seed;
        const bool tc = model.kind == PriceModel::Kind::time_change;
        sc.dt = tc ? a.tc_dt : a.dt;
        if (tc) sc.horizon = a.tc_horizon > 0.0 ? a.tc_horizon : rep.hedge->T_max();
        const double allowance = a.allowance >= 0.0 ? a.allowance : subhedge_allowance(rep, sc.dt);
        const SubhedgeReport s = verify_subhedge(rep, model, sc, allowance);
        json entry = io::subhedge_json(s);
        entry["model"] = spec;
        j["models"].push_back(entry);
        j["diagnostics"]["ks"][spec] = s.ks;
        if (tc)
            j["diagnostics"]["tightness"] = {{"mean_portfolio", s.mean_portfolio}, {"se", s.se_portfolio},
                                             {"lower_bound", rep.lower_bound}, {"tight", s.tight}};
        c.say("hedge-report [" + spec + "]: " + fmt(100.0 * s.fraction_ok) + "% of paths sub-hedged, mean portfolio " +
              fmt(s.mean_portfolio) + " vs bound " + fmt(rep.lower_bound) + (tc ? (s.tight ? " (tight)" : " (not tight)") : ""));
    }
    io::write_json(c.path("hedge_report.json"), j);
    io::write_hedge_functions(*rep.hedge, c.path("hedge"));
    write_price_outputs(c, rep);
    return exit_ok;
}

struct DemoArgs {
    ParabolaCase pc;
    std::size_t nx = 561;
    std::size_t nt = 1000;
    double x_min = -3.0, x_max = 4.0;
    double T_max = 12.5;
    bool check_martingale = false;
    bool check_optimality = false;
    std::size_t paths = 100000;
    double dt = 1e-3;
};

int cmd_demo_example(const Context& c, const DemoArgs& a) {
    const ParabolaCase& pc = a.pc;
    if (a.nx < 5 || !(a.x_max > a.x_min)) throw InputError("demo grid needs nx >= 5 and x-max > x-min");
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> x(a.nx);
    for (std::size_t i = 0; i < a.nx; ++i)
        x[i] = a.x_min + (a.x_max - a.x_min) * static_cast<double>(i) / static_cast<double>(a.nx - 1);
    const Barrier barrier = Barrier::from_function(x, [&](double v) { return pc.R(v); });
    const DiffusionSpec diff = DiffusionSpec::brownian();
    const PayoffSpec payoff = PayoffSpec::power(2.0, 0.5);
    HedgeConfig hc;
    hc.T_max = a.T_max;
    hc.nt = a.nt;
    const HedgeFunctions hf = build_hedge(diff, barrier, payoff, hc);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    double eM = 0, eZ = 0, eG = 0, eH = 0, eGap = 0;
    for (std::size_t i = 0; i < hf.x.size(); ++i) {
        const double xi = hf.x[i];
        if (xi < -1.9 || xi > 2.9) continue;
        eZ = std::max(eZ, std::abs(hf.Z[i] - pc.Z(xi)));
        eH = std::max(eH, std::abs(hf.H[i] - pc.H(xi)));
        for (std::size_t j = 0; j < hf.t.size() && hf.t[j] <= 6.0; ++j) {
            const double t = hf.t[j];
            eM = std::max(eM, std::abs(hf.M(i, j) - pc.M(xi, t)));
            eG = std::max(eG, std::abs(hf.G(i, j) - pc.G(xi, t)));
            eGap = std::max(eGap, std::abs(hf.G(i, j) + hf.H[i] - payoff.F(t) - pc.gap(xi, t)));
        }
    }
    const PathwiseReport pw = verify_pathwise(hf);
    const double tol = 1e-3;
    json j = {{"parameters", {{"alpha", pc.alpha}, {"beta", pc.beta}, {"lambda", pc.lambda}}},
              {"grid", {{"nx", a.nx}, {"nt", a.nt}, {"x_min", a.x_min}, {"x_max", a.x_max}, {"T_max", a.T_max}}},
              {"max_error", {{"M", eM}, {"Z", eZ}, {"G", eG}, {"H", eH}, {"G_plus_H_minus_F", eGap}}},
              {"tolerance", tol},
              {"pathwise", {{"max_gap", pw.max_gap}, {"max_contact_gap", pw.max_contact_gap}, {"pass", pw.pass}}},
              };
    const bool golden = std::max({eM, eZ, eG, eH, eGap}) <= tol;
    j["pass"] = golden && pw.pass;
    {
        std::ofstream e(c.path("demo_errors.csv"));
        e << "function,max_error,tolerance\n";
        for (auto [name, v] : {std::pair{"M", eM}, {"Z", eZ}, {"G", eG}, {"H", eH}, {"G+H-F", eGap}})
            e << name << ',' << io::num(v) << ',' << io::num(tol) << '\n';
    }
    c.say("demo-example: max errors M " + fmt(eM) + " Z " + fmt(eZ) + " G " + fmt(eG) + " H " + fmt(eH) +
          " G+H-F " + fmt(eGap) + (golden ? " PASS" : " FAIL") + " in " + fmt(seconds) + " s");

    SimulationConfig sc;
    sc.n_paths = a.paths;
    sc.dt = a.dt;
    sc.seed = c.g.seed;
    sc.horizon = 4.0 * a.T_max;
    if (a.check_martingale) {
        const std::vector<double> ladder{0.5, 1.0, 2.0, 4.0};
        const MartingaleReport mr = verify_martingale(hf, diff, barrier, Measure::dirac(0.0), ladder, sc);
        j["martingale"] = {{"times", mr.times}, {"start_mean", mr.start_mean},
                           {"stopped_mean", mr.stopped_mean}, {"stopped_diff_se", mr.stopped_diff_se},
                           {"free_mean", mr.free_mean}, {"free_increment_se", mr.free_increment_se},
                           {"stopped_constant", mr.stopped_constant}, {"free_nondecreasing", mr.free_nondecreasing}};
        c.say(std::string("martingale check: stopped ") + (mr.stopped_constant ? "constant" : "NOT constant") +
              ", unstopped " + (mr.free_nondecreasing ? "non-decreasing" : "DECREASING"));
    }
    if (a.check_optimality) {
        const PathBatch root = simulate_stopped(diff, Measure::dirac(0.0), barrier, sc);
        const Measure law = Measure::empirical(root.stopped_values);
        const Measure centred = law.shifted(-law.mean());
        SimulationConfig cc = sc;
        cc.seed = sc.seed + 1;
        const PathBatch comp = simulate_randomized_interval(centred, 0.0, 1, cc);
        const OptimalityReport orp = optimality_gap(hf, payoff, root, comp, centred);
        j["optimality"] = {{"root_mean", orp.root_mean}, {"root_se", orp.root_se},
                           {"competitor_mean", orp.competitor_mean}, {"competitor_se", orp.competitor_se},
                           {"competitor_bound_mean", orp.competitor_bound_mean},
                           {"competitor_ks", orp.competitor_ks}, {"ks_critical", orp.ks_critical},
                           {"pass", orp.pass}};
        c.say("optimality check: E F(root) " + fmt(orp.root_mean) + " <= E F(competitor) " +
              fmt(orp.competitor_mean) + (orp.pass ? " PASS" : " FAIL"));
    }
    io::write_json(c.path("demo_report.json"), j);
    return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Root barrier solver, hedging functions and variance option bounds", "rootbarrier"};
    app.require_subcommand(1);
    // Global flags may also follow the subcommand.
    app.fallthrough();
    Global g;
    app.add_option("--config", g.config, "JSON file whose keys mirror the flags; it wins conflicts");
    app.add_option("--seed", g.seed, "random seed");
    app.add_option("--out-dir", g.out_dir, "directory for output files");
    app.add_flag("--quiet", g.quiet, "suppress the summary on stdout");

    SolveArgs solve_args, embed_args;
    auto* solve_cmd = app.add_subcommand("solve-barrier", "solve for the Root barrier of a target law");
    auto* embed_cmd = app.add_subcommand("verify-embed", "check that a target law can be embedded");
    for (auto [cmd, a] : {std::pair{solve_cmd, &solve_args}, {embed_cmd, &embed_args}}) {
        cmd->add_option("--nu", a->nu, "initial law (JSON); default a point mass");
        cmd->add_option("--mu", a->mu, "target law (JSON)")->required();
        cmd->add_option("--sigma", a->sigma, "bm[:scale] | gbm | tanh:s0,s1");
        a->solver.add(cmd);
        cmd->add_option("--simulate", a->simulate, "number of Monte Carlo paths (0: none)");
        cmd->add_option("--dt", a->dt, "simulation step")->check(CLI::PositiveNumber);
        cmd->add_option("--horizon", a->horizon, "simulation horizon (0: solver horizon)");
        cmd->add_flag("--dump-paths", a->dump_paths, "write per-path CSV");
    }

    PriceArgs price_args, hedge_args;
    auto* price_cmd = app.add_subcommand("price-bound", "lower bound on an option on realised variance");
    price_args.pricing.add(price_cmd);
    price_cmd->add_flag("--upper", price_args.upper, "also report the concave upper bound");
    auto* hedge_cmd = app.add_subcommand("hedge-report", "lower bound plus simulated sub-hedge checks");
    hedge_args.pricing.add(hedge_cmd);
    hedge_cmd->add_option("--model", hedge_args.models, "constant:vol | piecewise:t/v,... | time-change");
    hedge_cmd->add_option("--paths", hedge_args.paths, "paths per model")->check(CLI::PositiveNumber);
    hedge_cmd->add_option("--dt", hedge_args.dt, "calendar step")->check(CLI::PositiveNumber);
    hedge_cmd->add_option("--tc-dt", hedge_args.tc_dt, "inner-clock step of the time-change model")
        ->check(CLI::PositiveNumber);
    hedge_cmd->add_option("--tc-horizon", hedge_args.tc_horizon, "inner-clock horizon (0: horizon of M)");
    hedge_cmd->add_option("--allowance", hedge_args.allowance, "pathwise slack (negative: discretisation allowance)");

    DemoArgs demo;
    auto* demo_cmd = app.add_subcommand("demo-example", "parabola barrier with closed-form hedging functions");
    demo_cmd->add_option("--alpha", demo.pc.alpha, "left root of the parabola (at -alpha)");
    demo_cmd->add_option("--beta", demo.pc.beta, "right root of the parabola");
    demo_cmd->add_option("--lambda", demo.pc.lambda, "curvature of the parabola");
    demo_cmd->add_option("--nx", demo.nx, "grid nodes");
    demo_cmd->add_option("--nt", demo.nt, "time steps")->check(CLI::PositiveNumber);
    demo_cmd->add_option("--x-min", demo.x_min, "lower end of the grid");
    demo_cmd->add_option("--x-max", demo.x_max, "upper end of the grid");
    demo_cmd->add_option("--T-max", demo.T_max, "horizon of M");
    demo_cmd->add_flag("--check-martingale", demo.check_martingale, "Monte Carlo martingale check");
    demo_cmd->add_flag("--check-optimality", demo.check_optimality, "compare with a competing embedding");
    demo_cmd->add_option("--paths", demo.paths, "paths for the Monte Carlo checks")->check(CLI::PositiveNumber);
    demo_cmd->add_option("--dt", demo.dt, "simulation step")->check(CLI::PositiveNumber);

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (!g.config.empty()) apply_config(app, sub, io::read_json(g.config), err);
        const Context c{g, out, err};
        fs::create_directories(g.out_dir);
        if (sub == solve_cmd) return cmd_solve_barrier(c, solve_args);
        if (sub == embed_cmd) return cmd_verify_embed(c, embed_args);
        if (sub == price_cmd) return cmd_price_bound(c, price_args);
        if (sub == hedge_cmd) return cmd_hedge_report(c, hedge_args);
        return cmd_demo_example(c, demo);
    } catch (const InputError& e) {
        err << "input error: " << e.what() << '\n';
        return exit_input;
    } catch (const MarketDataError& e) {
        err << "market data error: " << e.what() << '\n';
        return exit_market;
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << '\n';
        return exit_solver;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const fs::filesystem_error& e) {
        err << "input error: " << e.what() << '\n';
        return exit_input;
    }
}

}  // namespace rootbarrier
