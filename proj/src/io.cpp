#include "rootbarrier/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rootbarrier/errors.hpp"

namespace rootbarrier::io {

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

double number(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) throw InputError(std::string("missing numeric field '") + key + "'");
    return j.at(key).get<double>();
}

std::vector<std::pair<double, double>> pairs(const json& arr, const char* a, const char* b) {
    if (!arr.is_array()) throw InputError("expected an array of pairs");
    std::vector<std::pair<double, double>> out;
    for (const auto& e : arr) {
        if (e.is_array() && e.size() == 2) out.emplace_back(e[0].get<double>(), e[1].get<double>());
        else if (e.is_object()) out.emplace_back(number(e, a), number(e, b));
        else throw InputError("malformed pair entry");
    }
    return out;
}

}  // namespace

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& j) { open_out(path) << j.dump(2) << '\n'; }

Measure measure_from_json(const json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        const json params = j.value("params", json::object());
        if (kind == "dirac") return Measure::dirac(number(params, "location"));
        if (kind == "normal") return Measure::normal(number(params, "mean"), number(params, "variance"));
        if (kind == "lognormal") return Measure::lognormal(number(params, "log_mean"), number(params, "log_variance"));
        if (kind == "atoms") {
            std::vector<Atom> atoms;
            for (auto [x, m] : pairs(j.at("atoms"), "location", "mass")) atoms.push_back({x, m});
            return Measure::atoms(std::move(atoms));
        }
        if (kind == "empirical") return Measure::empirical(j.at("samples").get<std::vector<double>>());
        if (kind == "tabulated_density") {
            std::vector<DensityPoint> table;
            for (auto [x, d] : pairs(j.at("density_table"), "x", "density")) table.push_back({x, d});
            return Measure::tabulated(std::move(table));
        }
        throw InputError("unknown measure kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed measure: ") + e.what());
    }
}

json measure_to_json(const Measure& m) {
    json j;
    switch (m.kind()) {
        case MeasureKind::normal:
            j = {{"kind", "normal"}, {"params", {{"mean", m.normal_mean()}, {"variance", m.normal_variance()}}}};
            break;
        case MeasureKind::lognormal:
            j = {{"kind", "lognormal"},
                 {"params", {{"log_mean", m.log_mean()}, {"log_variance", m.log_variance()}}}};
            break;
        case MeasureKind::atoms: {
            json atoms = json::array();
            for (const Atom& a : m.atom_list()) atoms.push_back({a.location, a.mass});
            j = {{"kind", "atoms"}, {"atoms", atoms}};
            break;
        }
        case MeasureKind::tabulated_density: {
            json table = json::array();
            for (const auto& p : m.density_table()) table.push_back({p.x, p.density});
            j = {{"kind", "tabulated_density"}, {"density_table", table}};
            break;
        }
    }
    return j;
}

Measure read_measure(const fs::path& path) { return measure_from_json(read_json(path)); }

MarketData read_market(const fs::path& quotes_csv, const fs::path& sidecar) {
    const json side = read_json(sidecar);
    MarketData m;
    m.spot = number(side, "spot");
    m.maturity = number(side, "maturity");
    if (!(m.maturity > 0.0)) throw InputError("maturity must be positive in " + sidecar.string());
    const double df = number(side, "discount_factor");
    if (!(df > 0.0)) throw InputError("discount_factor must be positive in " + sidecar.string());
    if (side.contains("rate_curve")) {
        const auto& rc = side.at("rate_curve");
        m.rate.times = rc.at("times").get<std::vector<double>>();
        m.rate.rates = rc.at("rates").get<std::vector<double>>();
        m.rate.validate();
        if (std::abs(m.rate.growth(m.maturity) * df - 1.0) > 1e-10)
            throw InputError("rate_curve disagrees with discount_factor in " + sidecar.string());
    } else {
        m.rate = RateCurve::flat(-std::log(df) / m.maturity);
    }

    std::ifstream in(quotes_csv);
    if (!in) throw InputError("cannot open " + quotes_csv.string());
    std::string line;
    std::getline(in, line);
    if (line.rfind("strike,price", 0) != 0) throw InputError("expected header 'strike,price' in " + quotes_csv.string());
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::istringstream s(line);
        double k = 0.0, c = 0.0;
        char comma = 0;
        if (!(s >> k >> comma >> c) || comma != ',')
            throw InputError("malformed quote at " + quotes_csv.string() + ":" + std::to_string(row));
        m.quotes.push_back({k, c});
    }
    m.validate();
    return m;
}

void write_market(const MarketData& m, const fs::path& quotes_csv, const fs::path& sidecar) {
    auto out = open_out(quotes_csv);
    out << "strike,price\n";
    for (const auto& q : m.quotes) out << num(q.strike) << ',' << num(q.price) << '\n';
    json side = {{"spot", m.spot}, {"maturity", m.maturity}, {"discount_factor", 1.0 / m.growth()}};
    if (m.rate.times.size() > 1) side["rate_curve"] = {{"times", m.rate.times}, {"rates", m.rate.rates}};
    write_json(sidecar, side);
}

void write_barrier(const Barrier& b, const fs::path& csv, const fs::path& meta) {
    auto out = open_out(csv);
    out << "x,R\n";
    const auto x = b.natural_grid();
    for (std::size_t i = 0; i < x.size(); ++i) out << num(x[i]) << ',' << num(b.R()[i]) << '\n';
    write_json(meta, {{"contact_tol", b.contact_tolerance()},
                      {"log_state", b.log_state()},
                      {"grid", {{"n", x.size()}, {"x_min", x.front()}, {"x_max", x.back()}}},
                      {"monotonicity_violations", b.monotonicity_violations()}});
}

void write_solution(const ObstacleSolution& sol, const fs::path& csv, const fs::path& meta) {
    auto out = open_out(csv);
    const auto x = sol.natural_x();
    out << "t";
    for (double v : x) out << ',' << num(v);
    out << '\n';
    for (std::size_t j = 0; j < sol.t.size(); ++j) {
        out << num(sol.t[j]);
        for (double v : sol.v.row(j)) out << ',' << num(v);
        out << '\n';
    }
    const auto& c = sol.config;
    write_json(meta, {{"grid", {{"nx", x.size()}, {"nt", sol.t.size() - 1}, {"x_min", x.front()}, {"x_max", x.back()},
                                {"T", sol.t.back()}, {"log_state", sol.grid.log_state}}},
                      {"config", {{"lambda", c.lambda},
                                  {"scheme", c.scheme == TimeScheme::implicit_projected ? "implicit" : "crank_nicolson"},
                                  {"lcp_tolerance", c.lcp_tolerance},
                                  {"max_iterations", c.max_iterations}}},
                      {"residual_summary", {{"max_residual", sol.max_residual},
                                            {"total_sweeps", sol.total_sweeps},
                                            {"max_sweeps", sol.max_sweeps}}}});
}

void write_hedge_functions(const HedgeFunctions& hf, const fs::path& dir) {
    fs::create_directories(dir);
    auto matrix = [&](const GridFunction& g, const char* name) {
        auto out = open_out(dir / name);
        out << "t";
        for (double v : hf.x) out << ',' << num(v);
        out << '\n';
        for (std::size_t j = 0; j < hf.t.size(); ++j) {
            out << num(hf.t[j]);
            for (double v : g.row(j)) out << ',' << num(v);
            out << '\n';
        }
    };
    matrix(hf.M, "M.csv");
    matrix(hf.G, "G.csv");
    matrix(hf.delta, "delta.csv");
    auto out = open_out(dir / "functions.csv");
    out << "x,R,Z,Z_slope,H\n";
    for (std::size_t i = 0; i < hf.x.size(); ++i)
        out << num(hf.x[i]) << ',' << num(hf.R[i]) << ',' << num(hf.Z[i]) << ',' << num(hf.Z_slope[i]) << ','
            << num(hf.H[i]) << '\n';
    const PathwiseReport pw = verify_pathwise(hf);
    write_json(dir / "hedge.json", {{"base_point", hf.base_point},
                                    {"payoff", hf.payoff.describe()},
                                    {"T_max", hf.T_max()},
                                    {"truncated_nodes", hf.truncated_nodes},
                                    {"tolerances", {{"pathwise", pw.tolerance},
                                                    {"max_gap", pw.max_gap},
                                                    {"max_contact_gap", pw.max_contact_gap}}}});
}

json batch_summary(const PathBatch& b, const Measure* target) {
    json j = {{"n", b.n_paths}, {"dt", b.dt}, {"seed", b.seed}, {"mean_tau", b.mean_stop_time()},
              {"horizon_mass", b.horizon_mass()}, {"horizon_warning", b.horizon_warning()}};
    if (target) {
        j["ks_statistics"] = {{"statistic", ks_statistic(b.stopped_values, *target)},
                              {"critical_1pct", ks_critical_1pct(b.n_paths)}};
    }
    return j;
}

void write_paths_csv(const PathBatch& b, const fs::path& csv) {
    auto out = open_out(csv);
    out << "path,start,tau,x_tau,at_horizon\n";
    for (std::size_t p = 0; p < b.n_paths; ++p)
        out << p << ',' << num(b.start_values[p]) << ',' << num(b.stop_times[p]) << ',' << num(b.stopped_values[p])
            << ',' << int(b.at_horizon[p]) << '\n';
}

json hedge_report_json(const HedgeReport& r) {
    json weights = json::array();
    for (const auto& w : r.portfolio.weights)
        weights.push_back({{"strike", w.strike}, {"units", w.units}, {"type", w.call ? "call" : "put"}});
    const auto& d = r.diagnostics;
    return {{"lower_bound", r.lower_bound},
            {"cash", r.portfolio.cash},
            {"forward_units", r.portfolio.forward_units},
            {"strike_weights", weights},
            {"payoff", r.payoff.describe()},
            {"diagnostics",
             {{"residuals", {{"vi_max_residual", d.vi_residual}, {"pathwise_gap", d.pathwise_gap}}},
              {"cross_check", r.cross_check},
              {"g0", r.g0},
              {"vi_horizon", d.vi_horizon},
              {"T_max", d.T_max},
              {"vi_sweeps", d.vi_sweeps},
              {"monotonicity_violations", d.monotonicity_violations},
              {"embed_violation", d.embed_violation},
              {"truncated_nodes", d.truncated_nodes},
              {"total_variation", r.portfolio.total_variation}}}};
}

json subhedge_json(const SubhedgeReport& s) {
    return {{"n_paths", s.n_paths},         {"allowance", s.allowance},
            {"fraction_ok", s.fraction_ok}, {"max_excess", s.max_excess},
            {"mean_portfolio", s.mean_portfolio}, {"se_portfolio", s.se_portfolio},
            {"mean_payoff", s.mean_payoff}, {"se_payoff", s.se_payoff},
            {"lower_bound", s.lower_bound}, {"aborted_fraction", s.aborted_fraction},
            {"ks", s.ks},                   {"ks_critical_1pct", s.ks_critical},
            {"tight", s.tight},             {"pass", s.pass}};
}

}  // namespace rootbarrier::io
