#include "rootbarrier/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "path_kernels.hpp"
#include "rootbarrier/errors.hpp"

namespace rootbarrier {

namespace {

std::size_t step_count(double horizon, double dt) {
    return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

}  // namespace

void SimulationConfig::validate() const {
    if (n_paths < 1) throw InputError("need at least one path");
    if (!(dt > 0.0)) throw InputError("dt must be positive");
    if (!(horizon > 0.0)) throw InputError("horizon must be positive");
}

double PathBatch::horizon_mass() const {
    if (at_horizon.empty()) return 0.0;
    const auto hits = std::count(at_horizon.begin(), at_horizon.end(), std::uint8_t{1});
    return static_cast<double>(hits) / static_cast<double>(at_horizon.size());
}

double PathBatch::mean_stop_time() const {
    if (stop_times.empty()) return 0.0;
    return std::accumulate(stop_times.begin(), stop_times.end(), 0.0) / static_cast<double>(stop_times.size());
}

PathBatch simulate_stopped(const DiffusionSpec& diff, const Measure& nu, const Barrier& barrier,
                           const SimulationConfig& cfg) {
    cfg.validate();
    if (diff.is_geometric() != barrier.log_state())
        throw InputError("barrier coordinates do not match the diffusion");
    const std::size_t n = cfg.n_paths;
    const std::size_t steps = step_count(cfg.horizon, cfg.dt);
    const double sq_dt = std::sqrt(cfg.dt);
    const bool exact = diff.has_constant_state_vol();

    PathBatch b;
    b.n_paths = n;
    b.dt = cfg.dt;
    b.horizon = cfg.horizon;
    b.seed = cfg.seed;
    b.start_values.resize(n);
    b.stop_times.resize(n);
    b.stopped_values.resize(n);
    b.at_horizon.assign(n, 0);
    if (cfg.keep_paths) b.states.resize(n);

    kernels::for_each_path(n, cfg.execution, [&](std::size_t p) {
        Rng rng(path_seed(cfg.seed, p));
        NormalDist gauss(0.0, 1.0);
        const double x0 = nu.sample(rng);
        double y = diff.to_state(x0);
        const double vol = exact ? diff.state_sigma(y) : 0.0;
        const double drift = diff.state_drift(y) * cfg.dt;
        std::vector<double>* path = cfg.keep_paths ? &b.states[p] : nullptr;
        if (path) path->push_back(x0);
        b.start_values[p] = x0;
        double t = 0.0;
        bool hit = false;
        for (std::size_t k = 1; k <= steps; ++k) {
            const double z = gauss(rng);
            y += exact ? drift + vol * sq_dt * z : diff.state_sigma(y) * sq_dt * z;
            t = std::min(static_cast<double>(k) * cfg.dt, cfg.horizon);
            if (path) path->push_back(diff.to_natural(y));
            if (Barrier::reached(t, barrier.lookup_state(y))) {
                hit = true;
                break;
            }
        }
        b.stop_times[p] = t;
        b.stopped_values[p] = diff.to_natural(y);
        b.at_horizon[p] = hit ? 0 : 1;
    });
    return b;
}

Potential empirical_potential(std::span<const double> values, std::span<const double> grid) {
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + v[k];
    const double inv = 1.0 / static_cast<double>(n);
    Potential p;
    p.grid.assign(grid.begin(), grid.end());
    p.values.resize(grid.size());
    p.mean = prefix[n] * inv;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i];
        const auto k = static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
        const double below = x * static_cast<double>(k) - prefix[k];
        const double above = (prefix[n] - prefix[k]) - x * static_cast<double>(n - k);
        p.values[i] = -(below + above) * inv;
    }
    return p;
}

Potential empirical_potential(const PathBatch& batch, std::span<const double> grid) {
    return empirical_potential(batch.stopped_values, grid);
}

LadderSample sample_ladder(const DiffusionSpec& diff, const Measure& nu, const Barrier& barrier,
                           std::span<const double> times, const SimulationConfig& cfg) {
    cfg.validate();
    if (times.empty()) throw InputError("ladder needs at least one time");
    if (diff.is_geometric() != barrier.log_state())
        throw InputError("barrier coordinates do not match the diffusion");
    const std::size_t n = cfg.n_paths, m = times.size();
    std::vector<std::size_t> rung_step(m);
    for (std::size_t r = 0; r < m; ++r) {
        if (r > 0 && !(times[r] > times[r - 1])) throw InputError("ladder times must increase");
        rung_step[r] = static_cast<std::size_t>(std::llround(times[r] / cfg.dt));
    }
    const double sq_dt = std::sqrt(cfg.dt);
    const bool exact = diff.has_constant_state_vol();

    LadderSample out;
    out.times.assign(times.begin(), times.end());
    out.n_paths = n;
    out.stopped_x.resize(n * m);
    out.stopped_t.resize(n * m);
    out.free_x.resize(n * m);
    out.start_x.resize(n);

    kernels::for_each_path(n, cfg.execution, [&](std::size_t p) {
        Rng rng(path_seed(cfg.seed, p));
        NormalDist gauss(0.0, 1.0);
        const double x0 = nu.sample(rng);
        out.start_x[p] = x0;
        double y = diff.to_state(x0);
        const double vol = exact ? diff.state_sigma(y) : 0.0;
        const double drift = diff.state_drift(y) * cfg.dt;
        bool stopped = false;
        double tau = 0.0, x_tau = x0;
        std::size_t r = 0;
        while (r < m && rung_step[r] == 0) {
            out.stopped_x[r * n + p] = x0;
            out.stopped_t[r * n + p] = 0.0;
            out.free_x[r * n + p] = x0;
            ++r;
        }
        for (std::size_t k = 1; r < m; ++k) {
            const double z = gauss(rng);
            y += exact ? drift + vol * sq_dt * z : diff.state_sigma(y) * sq_dt * z;
            const double t = static_cast<double>(k) * cfg.dt;
            const double x = diff.to_natural(y);
            if (!stopped && Barrier::reached(t, barrier.lookup_state(y))) {
                stopped = true;
                tau = t;
                x_tau = x;
            }
            while (r < m && rung_step[r] == k) {
                out.free_x[r * n + p] = x;
                out.stopped_x[r * n + p] = stopped ? x_tau : x;
                out.stopped_t[r * n + p] = stopped ? tau : t;
                ++r;
            }
        }
    });
    return out;
}

double RateCurve::integral(double t) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double a = times[k];
        if (t <= a) break;
        const double b = k + 1 < times.size() ? std::min(times[k + 1], t) : t;
        acc += rates[k] * (b - a);
    }
    return acc;
}

double RateCurve::growth(double t) const { return std::exp(integral(t)); }

void RateCurve::validate() const {
    if (times.empty() || times.size() != rates.size()) throw InputError("rate curve times and rates differ");
    if (times.front() != 0.0) throw InputError("rate curve must start at 0");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw InputError("rate curve times must increase");
    for (double r : rates)
        if (!std::isfinite(r)) throw InputError("rate must be finite");
}

PriceModel PriceModel::constant_vol(double s0, double maturity, double vol, RateCurve rate) {
    PriceModel m;
    m.kind = Kind::constant;
    m.s0 = s0;
    m.maturity = maturity;
    m.vol = vol;
    m.rate = std::move(rate);
    m.validate();
    return m;
}

PriceModel PriceModel::piecewise_vol(double s0, double maturity, std::vector<double> times, std::vector<double> vols,
                                     RateCurve rate) {
    PriceModel m;
    m.kind = Kind::piecewise;
    m.s0 = s0;
    m.maturity = maturity;
    m.vol_times = std::move(times);
    m.vols = std::move(vols);
    m.rate = std::move(rate);
    m.validate();
    return m;
}

PriceModel PriceModel::time_change(double s0, double maturity, std::shared_ptr<const Barrier> barrier,
                                   RateCurve rate) {
    PriceModel m;
    m.kind = Kind::time_change;
    m.s0 = s0;
    m.maturity = maturity;
    m.barrier = std::move(barrier);
    m.rate = std::move(rate);
    m.validate();
    return m;
}

std::string PriceModel::name() const {
    switch (kind) {
        case Kind::constant: return "constant";
        case Kind::piecewise: return "piecewise";
        case Kind::time_change: return "time-change";
    }
    return "unknown";
}

void PriceModel::validate() const {
    if (!(s0 > 0.0)) throw InputError("spot must be positive");
    if (!(maturity > 0.0)) throw InputError("maturity must be positive");
    rate.validate();
    switch (kind) {
        case Kind::constant:
            if (!(vol >= 0.0) || !std::isfinite(vol)) throw InputError("volatility must be finite and >= 0");
            break;
        case Kind::piecewise:
            if (vol_times.empty() || vol_times.size() != vols.size() || vol_times.front() != 0.0)
                throw InputError("piecewise volatility needs matching times starting at 0");
            for (std::size_t k = 0; k < vols.size(); ++k) {
                if (!(vols[k] >= 0.0) || !std::isfinite(vols[k])) throw InputError("volatility must be finite and >= 0");
                if (k > 0 && !(vol_times[k] > vol_times[k - 1])) throw InputError("volatility times must increase");
            }
            break;
        case Kind::time_change:
            if (!barrier || !barrier->log_state()) throw InputError("time-change model needs a log-price barrier");
            break;
    }
}

namespace {

// Integral of sigma^2 over [a, b] for a piecewise-constant volatility.
double variance_between(const PriceModel& m, double a, double b) {
    if (m.kind == PriceModel::Kind::constant) return m.vol * m.vol * (b - a);
    double acc = 0.0;
    for (std::size_t k = 0; k < m.vol_times.size(); ++k) {
        const double lo = std::max(a, m.vol_times[k]);
        const double hi = std::min(b, k + 1 < m.vol_times.size() ? m.vol_times[k + 1] : b);
        if (hi > lo) acc += m.vols[k] * m.vols[k] * (hi - lo);
    }
    return acc;
}

}  // namespace

PathBatch simulate_price_model(const PriceModel& model, const SimulationConfig& cfg, const HoldingFn* holding) {
    model.validate();
    cfg.validate();
    const std::size_t n = cfg.n_paths;
    PathBatch b;
    b.n_paths = n;
    b.dt = cfg.dt;
    b.seed = cfg.seed;
    b.start_values.assign(n, model.s0);
    b.stop_times.resize(n);
    b.stopped_values.resize(n);
    b.at_horizon.assign(n, 0);
    b.realized_variance.resize(n);
    b.aborted.assign(n, 0);
    if (holding) b.hedge_gains.assign(n, 0.0);
    if (cfg.keep_paths) b.states.resize(n);

    const double T = model.maturity;
    if (model.kind != PriceModel::Kind::time_change) {
        b.horizon = T;
        const std::size_t steps = std::max<std::size_t>(1, step_count(T, cfg.dt));
        const double h = T / static_cast<double>(steps);
        std::vector<double> var_step(steps), rate_step(steps);
        for (std::size_t k = 0; k < steps; ++k) {
            const double a = h * static_cast<double>(k), c = h * static_cast<double>(k + 1);
            var_step[k] = variance_between(model, a, c);
            rate_step[k] = model.rate.integral(c) - model.rate.integral(a);
        }
        kernels::for_each_path(n, cfg.execution, [&](std::size_t p) {
            Rng rng(path_seed(cfg.seed, p));
            NormalDist gauss(0.0, 1.0);
            double log_x = std::log(model.s0);  // discounted log price
            double x = model.s0, tau = 0.0, gains = 0.0;
            std::vector<double>* path = cfg.keep_paths ? &b.states[p] : nullptr;
            if (path) path->push_back(x);
            for (std::size_t k = 0; k < steps; ++k) {
                const double v = var_step[k];
                const double d_log_x = -0.5 * v + std::sqrt(v) * gauss(rng);
                log_x += d_log_x;
                const double x_next = std::exp(log_x);
                if (!(x_next > 0.0) || !std::isfinite(x_next)) {
                    b.aborted[p] = 1;
                    break;
                }
                if (holding) gains += (*holding)(x, tau) * (x_next - x);
                const double d_log_s = d_log_x + rate_step[k];
                tau += d_log_s * d_log_s;
                x = x_next;
                if (path) path->push_back(x);
            }
            b.stop_times[p] = T;
            b.stopped_values[p] = x;
            b.realized_variance[p] = tau;
            if (holding) b.hedge_gains[p] = gains;
        });
        return b;
    }

    // Inner clock u in [0, horizon]; calendar time s = T u / (1 + u).
    const Barrier& barrier = *model.barrier;
    b.horizon = cfg.horizon;
    const std::size_t steps = step_count(cfg.horizon, cfg.dt);
    const double sq_du = std::sqrt(cfg.dt);
    auto calendar = [T](double u) { return T * u / (1.0 + u); };
    kernels::for_each_path(n, cfg.execution, [&](std::size_t p) {
        Rng rng(path_seed(cfg.seed, p));
        NormalDist gauss(0.0, 1.0);
        double y = std::log(model.s0);
        double x = model.s0, tau = 0.0, gains = 0.0, u = 0.0, s = 0.0;
        std::vector<double>* path = cfg.keep_paths ? &b.states[p] : nullptr;
        if (path) path->push_back(x);
        bool hit = false;
        for (std::size_t k = 1; k <= steps; ++k) {
            const double dy = -0.5 * cfg.dt + sq_du * gauss(rng);
            y += dy;
            const double x_next = std::exp(y);
            if (holding) gains += (*holding)(x, tau) * (x_next - x);
            const double u_next = std::min(static_cast<double>(k) * cfg.dt, cfg.horizon);
            const double s_next = calendar(u_next);
            const double d_log_s = dy + model.rate.integral(s_next) - model.rate.integral(s);
            tau += d_log_s * d_log_s;
            x = x_next;
            u = u_next;
            s = s_next;
            if (path) path->push_back(x);
            if (Barrier::reached(u, barrier.lookup_state(y))) {
                hit = true;
                break;
            }
        }
        // Frozen after tau_D: S then grows at the short rate, a smooth path with
        // no quadratic variation, so tau is complete.
        b.stop_times[p] = u;
        b.stopped_values[p] = x;
        b.realized_variance[p] = tau;
        b.at_horizon[p] = hit ? 0 : 1;
        if (holding) b.hedge_gains[p] = gains;
    });
    return b;
}

}  // namespace rootbarrier
