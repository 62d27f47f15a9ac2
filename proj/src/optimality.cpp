#include "rootbarrier/optimality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "path_kernels.hpp"
#include "rootbarrier/errors.hpp"

namespace rootbarrier {

// ---------------------------------------------------------------- payoffs

PayoffSpec PayoffSpec::variance_call(double strike) {
    if (!(strike >= 0.0) || !std::isfinite(strike)) throw InputError("variance call strike must be >= 0");
    PayoffSpec p;
    p.kind_ = Kind::variance_call;
    p.a_ = strike;
    return p;
}

PayoffSpec PayoffSpec::power(double exponent, double scale) {
    if (!(exponent >= 1.0) || !std::isfinite(exponent)) throw InputError("power payoff needs exponent >= 1");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InputError("power payoff needs a positive scale");
    PayoffSpec p;
    p.kind_ = Kind::power;
    p.a_ = exponent;
    p.b_ = scale;
    return p;
}

PayoffSpec PayoffSpec::custom_table(std::vector<double> times, std::vector<double> f_values) {
    if (times.size() < 2 || times.size() != f_values.size())
        throw InputError("custom payoff needs matching time and f tables of length >= 2");
    if (times.front() != 0.0) throw InputError("custom payoff table must start at t = 0");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!std::isfinite(times[k]) || !std::isfinite(f_values[k])) throw InputError("custom payoff: non-finite entry");
        if (f_values[k] < 0.0) throw InputError("custom payoff: f must be >= 0");
        if (k > 0 && !(times[k] > times[k - 1])) throw InputError("custom payoff: times must increase");
        if (k > 0 && f_values[k] < f_values[k - 1]) throw InputError("custom payoff: f must be non-decreasing");
    }
    PayoffSpec p;
    p.kind_ = Kind::custom_table;
    p.Fcum_.assign(times.size(), 0.0);
    for (std::size_t k = 1; k < times.size(); ++k)
        p.Fcum_[k] = p.Fcum_[k - 1] + 0.5 * (times[k] - times[k - 1]) * (f_values[k] + f_values[k - 1]);
    p.times_ = std::move(times);
    p.fvals_ = std::move(f_values);
    return p;
}

double PayoffSpec::raw_F(double t) const {
    if (t <= 0.0) return 0.0;
    switch (kind_) {
        case Kind::variance_call: return std::max(t - a_, 0.0);
        case Kind::power: return b_ * std::pow(t, a_);
        case Kind::custom_table: {
            if (t >= times_.back()) return Fcum_.back() + fvals_.back() * (t - times_.back());
            const std::size_t k = bracket(times_, t);
            const double h = times_[k + 1] - times_[k], s = t - times_[k];
            return Fcum_[k] + fvals_[k] * s + (fvals_[k + 1] - fvals_[k]) * s * s / (2.0 * h);
        }
    }
    return 0.0;
}

double PayoffSpec::raw_f(double t) const {
    t = std::max(t, 0.0);
    switch (kind_) {
        case Kind::variance_call: return t >= a_ ? 1.0 : 0.0;
        case Kind::power: return a_ == 1.0 ? b_ : b_ * a_ * std::pow(t, a_ - 1.0);
        case Kind::custom_table: {
            if (t >= times_.back()) return fvals_.back();
            const std::size_t k = bracket(times_, t);
            const double w = (t - times_[k]) / (times_[k + 1] - times_[k]);
            return fvals_[k] + w * (fvals_[k + 1] - fvals_[k]);
        }
    }
    return 0.0;
}

double PayoffSpec::F(double t) const {
    if (t <= cap_time_) return raw_F(t);
    return raw_F(cap_time_) + cap_ * (t - cap_time_);
}

double PayoffSpec::f(double t) const { return std::min(raw_f(t), cap_); }

double PayoffSpec::f_bound() const {
    double raw = 0.0;
    switch (kind_) {
        case Kind::variance_call: raw = 1.0; break;
        case Kind::power: raw = a_ == 1.0 ? b_ : std::numeric_limits<double>::infinity(); break;
        case Kind::custom_table: raw = fvals_.back(); break;
    }
    return std::min(raw, cap_);
}

PayoffSpec PayoffSpec::capped(double N) const {
    if (!(N >= 0.0)) throw InputError("payoff cap must be >= 0");
    PayoffSpec p = *this;
    if (N >= f_bound()) return p;
    p.cap_ = N;
    switch (kind_) {
        case Kind::variance_call: p.cap_time_ = a_; break;
        case Kind::power: p.cap_time_ = std::pow(N / (b_ * a_), 1.0 / (a_ - 1.0)); break;
        case Kind::custom_table: {
            if (fvals_.front() >= N) {
                p.cap_time_ = 0.0;
                break;
            }
            std::size_t k = 0;
            while (fvals_[k + 1] < N) ++k;
            p.cap_time_ = times_[k] + (N - fvals_[k]) / (fvals_[k + 1] - fvals_[k]) * (times_[k + 1] - times_[k]);
            break;
        }
    }
    // An earlier cap on this payoff already bounds the threshold.
    p.cap_time_ = std::min(p.cap_time_, cap_time_);
    return p;
}

std::string PayoffSpec::describe() const {
    std::ostringstream s;
    switch (kind_) {
        case Kind::variance_call: s << "variance_call(K=" << a_ << ")"; break;
        case Kind::power: s << "power(p=" << a_ << ", scale=" << b_ << ")"; break;
        case Kind::custom_table: s << "custom_table(" << times_.size() << " knots)"; break;
    }
    if (is_capped()) s << " capped at f=" << cap_;
    return s.str();
}

// ---------------------------------------------------------------- M

GridFunction compute_M(const DiffusionSpec& diff, const Barrier& barrier, const PayoffSpec& payoff, double T_max,
                       std::size_t nt) {
    if (!(T_max > 0.0) || nt < 1) throw InputError("compute_M needs T_max > 0 and nt >= 1");
    if (diff.is_geometric() != barrier.log_state()) throw InputError("barrier coordinates do not match the diffusion");
    const auto& y = barrier.state_grid();
    const auto& R = barrier.R();
    const std::size_t n = y.size();
    if (n < 3) throw InputError("compute_M needs at least 3 grid nodes");

    std::size_t alive_at_end = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (!Barrier::reached(T_max, R[i])) ++alive_at_end;
    const double tail = payoff.f_bound() - payoff.f(T_max);
    if (alive_at_end > 0 && tail > 1e-12 * std::max(1.0, payoff.f(T_max))) {
        std::ostringstream msg;
        msg << "horizon T_max=" << T_max << " too short: " << alive_at_end
            << " nodes have not met the barrier and f still grows by " << tail << "; increase the horizon";
        throw InputError(msg.str());
    }

    std::vector<double> t(nt + 1);
    for (std::size_t j = 0; j <= nt; ++j) t[j] = T_max * static_cast<double>(j) / static_cast<double>(nt);
    t[nt] = T_max;
    GridFunction M(y, t);
    for (std::size_t i = 0; i < n; ++i) M(i, nt) = payoff.f(T_max);

    std::vector<double> lo(n), di(n), up(n), rhs(n), cp(n), dp(n);
    for (std::size_t jj = nt; jj-- > 0;) {
        const double tj = t[jj];
        const double dt = t[jj + 1] - tj;
        const double fj = payoff.f(tj);
        auto contact = [&](std::size_t k) { return Barrier::reached(tj, R[k]); };
        for (std::size_t i = 0; i < n; ++i) {
            lo[i] = up[i] = 0.0;
            if (contact(i)) {
                di[i] = 1.0;
                rhs[i] = fj;
                continue;
            }
            const double delta = std::min(dt, R[i] - tj);
            const double future = delta < dt ? payoff.f(R[i]) : M(i, jj + 1);
            if (i == 0 || i + 1 == n) {
                di[i] = 1.0;
                rhs[i] = future;
                continue;
            }
            // Distance to each neighbour, shortened where the barrier crosses in between.
            auto reach = [&](std::size_t k) {
                const double h = std::abs(y[k] - y[i]);
                if (!contact(k)) return h;
                const double theta = std::isfinite(R[i]) ? (R[i] - tj) / (R[i] - R[k]) : 1.0;
                return h * std::clamp(theta, 1e-6, 1.0);
            };
            const double hl = reach(i - 1), hr = reach(i + 1);
            const double a = diff.state_diffusion(y[i]), c = diff.state_drift(y[i]);
            const double al = (2.0 * a - c * hr) / (hl * (hl + hr));
            const double ar = (2.0 * a + c * hl) / (hr * (hl + hr));
            if (al < 0.0 || ar < 0.0) throw InputError("grid too coarse for the drift in compute_M");
            di[i] = 1.0 / delta + al + ar;
            rhs[i] = future / delta;
            if (contact(i - 1)) rhs[i] += al * fj;
            else lo[i] = -al;
            if (contact(i + 1)) rhs[i] += ar * fj;
            else up[i] = -ar;
        }
        cp[0] = up[0] / di[0];
        dp[0] = rhs[0] / di[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double m = di[i] - lo[i] * cp[i - 1];
            cp[i] = up[i] / m;
            dp[i] = (rhs[i] - lo[i] * dp[i - 1]) / m;
        }
        auto row = M.row(jj);
        row[n - 1] = dp[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) row[i] = dp[i] - cp[i] * row[i + 1];
    }
    return M;
}

// ---------------------------------------------------------------- Z

ZFunction compute_Z(std::span<const double> M0, const DiffusionSpec& diff, std::span<const double> x,
                    double base_point) {
    const std::size_t n = x.size();
    if (n < 2 || M0.size() != n) throw InputError("compute_Z needs matching grids of length >= 2");
    std::vector<double> g(n), W(n, 0.0), dW(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = diff.sigma(x[i]);
        g[i] = 2.0 * M0[i] / (s * s);
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double h = x[k + 1] - x[k];
        dW[k + 1] = dW[k] + 0.5 * h * (g[k] + g[k + 1]);
        W[k + 1] = W[k] + dW[k] * h + h * h * (2.0 * g[k] + g[k + 1]) / 6.0;
    }
    const double b = std::clamp(base_point, x.front(), x.back());
    const std::size_t k = bracket(x, b);
    const double h = x[k + 1] - x[k], s = b - x[k], dg = (g[k + 1] - g[k]) / h;
    const double dWb = dW[k] + g[k] * s + dg * s * s / 2.0;
    const double Wb = W[k] + dW[k] * s + g[k] * s * s / 2.0 + dg * s * s * s / 6.0;
    ZFunction out;
    out.Z.resize(n);
    out.slope.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.Z[i] = W[i] - Wb - dWb * (x[i] - b);
        out.slope[i] = dW[i] - dWb;
    }
    return out;
}

// ---------------------------------------------------------------- G, H

HedgeFunctions compute_G_H(const GridFunction& M, const ZFunction& Zf, const DiffusionSpec& diff,
                           const Barrier& barrier, const PayoffSpec& payoff, double base_point) {
    const std::size_t n = M.nx(), m = M.nt();
    if (barrier.R().size() != n || Zf.Z.size() != n) throw InputError("compute_G_H: inconsistent grids");
    HedgeFunctions hf;
    hf.x = barrier.natural_grid();
    hf.t = M.t();
    hf.log_state = barrier.log_state();
    hf.base_point = base_point;
    hf.payoff = payoff;
    hf.R = barrier.R();
    hf.Z = Zf.Z;
    hf.Z_slope = Zf.slope;
    hf.f0 = payoff.f(0.0);
    hf.sigma_left = diff.sigma(hf.x.front());
    hf.sigma_right = diff.sigma(hf.x.back());
    hf.M = GridFunction(hf.x, hf.t);
    hf.J = GridFunction(hf.x, hf.t);
    hf.G = GridFunction(hf.x, hf.t);
    hf.delta = GridFunction(hf.x, hf.t);
    hf.J_at_R.assign(n, 0.0);
    hf.H.assign(n, 0.0);
    const auto& t = hf.t;

    for (std::size_t i = 0; i < n; ++i) {
        const double R = hf.R[i];
        double J = 0.0, JR = 0.0;
        bool done = false;
        for (std::size_t j = 0; j < m; ++j) {
            hf.M(i, j) = M(i, j);
            if (!done && j > 0) {
                const double g0 = M(i, j - 1) - payoff.f(t[j - 1]);
                if (Barrier::reached(t[j], R)) {
                    JR = J + 0.5 * (R - t[j - 1]) * g0;
                    done = true;
                } else {
                    J += 0.5 * (t[j] - t[j - 1]) * (g0 + M(i, j) - payoff.f(t[j]));
                }
            }
            if (j == 0 && Barrier::reached(0.0, R)) done = true;
            hf.J(i, j) = done ? JR : J;
        }
        if (!done) {
            JR = J;
            ++hf.truncated_nodes;
        }
        hf.J_at_R[i] = JR;
        hf.H[i] = hf.Z[i] - JR;
        for (std::size_t j = 0; j < m; ++j) hf.G(i, j) = payoff.F(t[j]) + hf.J(i, j) - hf.Z[i];
    }

    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            double left = 0.0, right = 0.0;
            int count = 0;
            if (i > 0) {
                left = (hf.G(i, j) - hf.G(i - 1, j)) / (hf.x[i] - hf.x[i - 1]);
                ++count;
            }
            if (i + 1 < n) {
                right = (hf.G(i + 1, j) - hf.G(i, j)) / (hf.x[i + 1] - hf.x[i]);
                ++count;
            }
            hf.delta(i, j) = (left + right) / count;
        }
    }
    return hf;
}

double HedgeFunctions::Z_at(double xv) const {
    const std::size_t n = x.size();
    if (xv < x.front() || xv > x.back()) {
        const bool below = xv < x.front();
        const std::size_t e = below ? 0 : n - 1;
        const double xe = x[e], d = xv - xe;
        double extra;
        if (log_state) {
            const double xs = std::max(xv, 1e-300);
            extra = 2.0 * f0 * (d / xe - std::log(xs / xe));
        } else {
            const double s = below ? sigma_left : sigma_right;
            extra = f0 * d * d / (s * s);
        }
        return Z[e] + Z_slope[e] * d + extra;
    }
    const std::size_t k = bracket(x, xv);
    const double h = x[k + 1] - x[k], s = (xv - x[k]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * Z[k] + h10 * h * Z_slope[k] + h01 * Z[k + 1] + h11 * h * Z_slope[k + 1];
}

double HedgeFunctions::Z_slope_at(double xv) const {
    const std::size_t n = x.size();
    if (xv < x.front() || xv > x.back()) {
        const bool below = xv < x.front();
        const std::size_t e = below ? 0 : n - 1;
        const double xe = x[e];
        double extra;
        if (log_state) {
            extra = 2.0 * f0 * (1.0 / xe - 1.0 / std::max(xv, 1e-300));
        } else {
            const double s = below ? sigma_left : sigma_right;
            extra = 2.0 * f0 * (xv - xe) / (s * s);
        }
        return Z_slope[e] + extra;
    }
    const std::size_t k = bracket(x, xv);
    const double h = x[k + 1] - x[k], s = (xv - x[k]) / h;
    const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
    const double d01 = -d00, d11 = 3 * s * s - 2 * s;
    return (d00 * Z[k] + d01 * Z[k + 1]) / h + d10 * Z_slope[k] + d11 * Z_slope[k + 1];
}

double HedgeFunctions::H_at(double xv) const {
    if (xv < x.front() || xv > x.back()) return Z_at(xv);
    const std::size_t k = bracket(x, xv);
    const double w = (xv - x[k]) / (x[k + 1] - x[k]);
    return Z_at(xv) - ((1.0 - w) * J_at_R[k] + w * J_at_R[k + 1]);
}

double HedgeFunctions::G_at(double xv, double tv) const {
    const double Ft = payoff.F(tv);
    if (xv < x.front() || xv > x.back()) return Ft - Z_at(xv);
    return Ft + J.interpolate(xv, std::min(tv, T_max())) - Z_at(xv);
}

double HedgeFunctions::delta_at(double xv, double tv) const {
    if (xv < x.front() || xv > x.back()) return -Z_slope_at(xv);
    return delta.interpolate(xv, std::min(tv, T_max()));
}

HedgeFunctions build_hedge(const DiffusionSpec& diff, const Barrier& barrier, const PayoffSpec& payoff,
                           const HedgeConfig& cfg) {
    if (cfg.nt < 1) throw InputError("hedge time grid needs nt >= 1");
    double T_max = cfg.T_max;
    if (!(T_max > 0.0)) {
        const double r = barrier.max_finite_on(cfg.support);
        T_max = r > 0.0 ? 4.0 * r : 1.0;
    }
    const PayoffSpec eff = payoff.bounded() ? payoff : payoff.capped(payoff.f(T_max));
    const GridFunction M = compute_M(diff, barrier, eff, T_max, cfg.nt);
    const auto x = barrier.natural_grid();
    const ZFunction Z = compute_Z(M.row(0), diff, x, cfg.base_point);
    return compute_G_H(M, Z, diff, barrier, eff, cfg.base_point);
}

// ---------------------------------------------------------------- checks

PathwiseReport verify_pathwise(const HedgeFunctions& hf, double tolerance) {
    PathwiseReport rep;
    rep.tolerance = tolerance;
    rep.max_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < hf.t.size(); ++j) {
        const double Ft = hf.payoff.F(hf.t[j]);
        for (std::size_t i = 0; i < hf.x.size(); ++i) {
            const double gap = hf.G(i, j) + hf.H[i] - Ft;
            if (gap > rep.max_gap) {
                rep.max_gap = gap;
                rep.at_x = hf.x[i];
                rep.at_t = hf.t[j];
            }
            if (Barrier::reached(hf.t[j], hf.R[i])) rep.max_contact_gap = std::max(rep.max_contact_gap, std::abs(gap));
        }
    }
    rep.pass = rep.max_gap <= tolerance && rep.max_contact_gap <= tolerance;
    return rep;
}

MeanSE mean_se(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n == 0) return {0.0, 0.0};
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
    if (n < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double a : v) ss += (a - mean) * (a - mean);
    return {mean, std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n))};
}

MartingaleReport verify_martingale(const HedgeFunctions& hf, const DiffusionSpec& diff, const Barrier& barrier,
                                   const Measure& nu, std::span<const double> ladder, const SimulationConfig& cfg) {
    const LadderSample s = sample_ladder(diff, nu, barrier, ladder, cfg);
    const std::size_t n = s.n_paths, m = s.times.size();
    std::vector<double> g0(n), prev(n), buf(n), diffs(n);
    for (std::size_t p = 0; p < n; ++p) g0[p] = prev[p] = hf.G_at(s.start_x[p], 0.0);

    MartingaleReport rep;
    rep.times = s.times;
    rep.start_mean = mean_se(g0).mean;
    rep.stopped_constant = rep.free_nondecreasing = true;
    const double floor = 1e-12 * std::max(1.0, std::abs(rep.start_mean));
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t p = 0; p < n; ++p) {
            buf[p] = hf.G_at(s.stopped_x[r * n + p], s.stopped_t[r * n + p]);
            diffs[p] = buf[p] - g0[p];
        }
        const MeanSE d = mean_se(diffs);
        rep.stopped_mean.push_back(mean_se(buf).mean);
        rep.stopped_diff_se.push_back(d.se);
        if (std::abs(d.mean) > 3.0 * d.se + floor) rep.stopped_constant = false;

        for (std::size_t p = 0; p < n; ++p) {
            buf[p] = hf.G_at(s.free_x[r * n + p], s.times[r]);
            diffs[p] = buf[p] - prev[p];
            prev[p] = buf[p];
        }
        const MeanSE inc = mean_se(diffs);
        rep.free_mean.push_back(mean_se(buf).mean);
        rep.free_increment_se.push_back(inc.se);
        if (inc.mean < -3.0 * inc.se - floor) rep.free_nondecreasing = false;
    }
    return rep;
}

// ---------------------------------------------------------------- competitor

namespace {

/// Draws the random interval (u, v), u < 0 < v, with density proportional to
/// (v - u) eta(du) eta(dv); returns u = v = 0 for the atom at zero.
class IntervalSampler {
public:
    explicit IntervalSampler(const Measure& eta) {
        const double scale = std::sqrt(std::max(eta.variance(), 1e-300));
        if (std::abs(eta.mean()) > 1e-9 * std::max(1.0, scale))
            throw InputError("randomized interval embedding needs a centred increment law");
        if (eta.kind() == MeasureKind::normal) {
            normal_ = true;
            sd_ = std::sqrt(eta.normal_variance());
            p_neg_ = 0.5;
            return;
        }
        const Measure atomic = eta.kind() == MeasureKind::atoms ? eta : eta.discretized(4000);
        for (const Atom& a : atomic.atom_list()) {
            if (std::abs(a.location) <= 1e-14 * scale) p_zero_ += a.mass;
            else if (a.location < 0) neg_.push_back(a);
            else pos_.push_back(a);
        }
        auto cum = [](const std::vector<Atom>& atoms, bool size_biased) {
            std::vector<double> c;
            double s = 0.0;
            for (const Atom& a : atoms) c.push_back(s += a.mass * (size_biased ? std::abs(a.location) : 1.0));
            return c;
        };
        neg_c_ = cum(neg_, false);
        neg_b_ = cum(neg_, true);
        pos_c_ = cum(pos_, false);
        pos_b_ = cum(pos_, true);
        const double pn = neg_c_.empty() ? 0.0 : neg_c_.back(), pp = pos_c_.empty() ? 0.0 : pos_c_.back();
        p_neg_ = pn + pp > 0.0 ? pn / (pn + pp) : 0.5;
        p_zero_ = std::clamp(p_zero_, 0.0, 1.0);
    }

    /// False when the draw lands on the atom at zero.
    bool draw(Rng& rng, double& u, double& v) const {
        UniformDist unif(0.0, 1.0);
        if (normal_) {
            NormalDist gauss(0.0, 1.0);
            const double rayleigh = sd_ * std::sqrt(-2.0 * std::log1p(-unif(rng)));
            const double half = sd_ * std::abs(gauss(rng));
            if (unif(rng) < p_neg_) {
                u = -half;
                v = rayleigh;
            } else {
                u = -rayleigh;
                v = half;
            }
            return true;
        }
        if (p_zero_ > 0.0 && unif(rng) < p_zero_) return false;
        if (neg_.empty() || pos_.empty()) return false;
        const bool first = unif(rng) < p_neg_;
        u = pick(neg_, first ? neg_c_ : neg_b_, unif(rng));
        v = pick(pos_, first ? pos_b_ : pos_c_, unif(rng));
        return true;
    }

private:
    static double pick(const std::vector<Atom>& atoms, const std::vector<double>& cum, double w) {
        const double target = w * cum.back();
        const auto k = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin());
        return atoms[std::min(k, atoms.size() - 1)].location;
    }

    bool normal_ = false;
    double sd_ = 0.0;
    double p_zero_ = 0.0;
    double p_neg_ = 0.5;
    std::vector<Atom> neg_, pos_;
    std::vector<double> neg_c_, neg_b_, pos_c_, pos_b_;
};

}  // namespace

PathBatch simulate_randomized_interval(const Measure& increment, double start, std::size_t stages,
                                       const SimulationConfig& cfg) {
    cfg.validate();
    if (stages < 1) throw InputError("need at least one stage");
    const IntervalSampler sampler(increment);
    const std::size_t n = cfg.n_paths;
    const double sq_dt = std::sqrt(cfg.dt);

    PathBatch b;
    b.n_paths = n;
    b.dt = cfg.dt;
    b.horizon = cfg.horizon;
    b.seed = cfg.seed;
    b.start_values.assign(n, start);
    b.stop_times.resize(n);
    b.stopped_values.resize(n);
    b.at_horizon.assign(n, 0);

    kernels::for_each_path(n, cfg.execution, [&](std::size_t p) {
        Rng rng(path_seed(cfg.seed, p));
        NormalDist gauss(0.0, 1.0);
        UniformDist unif(0.0, 1.0);
        double x = start, t = 0.0;
        bool capped = false;
        for (std::size_t s = 0; s < stages && !capped; ++s) {
            double u = 0.0, v = 0.0;
            if (!sampler.draw(rng, u, v)) continue;
            const double lo = x + u, hi = x + v;
            while (true) {
                if (t >= cfg.horizon) {
                    capped = true;
                    break;
                }
                const double next = x + sq_dt * gauss(rng);
                t += cfg.dt;
                if (next >= hi) {
                    x = hi;
                    break;
                }
                if (next <= lo) {
                    x = lo;
                    break;
                }
                // Brownian-bridge crossing inside the step.
                const double cross_hi = std::exp(-2.0 * (hi - x) * (hi - next) / cfg.dt);
                const double cross_lo = std::exp(-2.0 * (x - lo) * (next - lo) / cfg.dt);
                const double w = unif(rng);
                if (w < cross_hi) {
                    x = hi;
                    break;
                }
                if (w < cross_hi + cross_lo) {
                    x = lo;
                    break;
                }
                x = next;
            }
        }
        b.stop_times[p] = t;
        b.stopped_values[p] = x;
        b.at_horizon[p] = capped ? 1 : 0;
    });
    return b;
}

OptimalityReport optimality_gap(const HedgeFunctions& hf, const PayoffSpec& payoff, const PathBatch& root,
                                const PathBatch& competitor, const Measure& mu) {
    OptimalityReport rep;
    rep.competitor_ks = ks_statistic(competitor.stopped_values, mu);
    rep.ks_critical = ks_critical_1pct(competitor.n_paths);
    if (rep.competitor_ks > rep.ks_critical) {
        std::ostringstream msg;
        msg << "competitor does not embed the target (KS " << rep.competitor_ks << " > " << rep.ks_critical << ")";
        throw InputError(msg.str());
    }
    auto payoff_stats = [&](const PathBatch& b) {
        std::vector<double> v(b.n_paths);
        for (std::size_t p = 0; p < b.n_paths; ++p) v[p] = payoff.F(b.stop_times[p]);
        return mean_se(v);
    };
    const MeanSE r = payoff_stats(root), c = payoff_stats(competitor);
    std::vector<double> bound(competitor.n_paths);
    for (std::size_t p = 0; p < competitor.n_paths; ++p) {
        const double x = competitor.stopped_values[p], tau = competitor.stop_times[p];
        bound[p] = hf.G_at(x, tau) + hf.H_at(x);
    }
    const MeanSE gh = mean_se(bound);
    rep.root_mean = r.mean;
    rep.root_se = r.se;
    rep.competitor_mean = c.mean;
    rep.competitor_se = c.se;
    rep.competitor_bound_mean = gh.mean;
    rep.competitor_bound_se = gh.se;
    rep.pass = r.mean <= c.mean + 3.0 * std::hypot(r.se, c.se);
    return rep;
}

}  // namespace rootbarrier
