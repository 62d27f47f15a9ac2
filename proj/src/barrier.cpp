#include "rootbarrier/barrier.hpp"

#include <algorithm>
#include <cmath>

#include "rootbarrier/errors.hpp"

namespace rootbarrier {

Barrier::Barrier(std::vector<double> state_grid, std::vector<double> R, bool log_state,
                 double contact_tolerance)
    : y_(std::move(state_grid)), R_(std::move(R)), log_state_(log_state), contact_tol_(contact_tolerance) {
    if (y_.size() != R_.size() || y_.size() < 2) throw InputError("barrier grid and values differ in size");
    for (std::size_t i = 0; i < y_.size(); ++i) {
        if (i > 0 && !(y_[i] > y_[i - 1])) throw InputError("barrier grid must be strictly increasing");
        if (!(R_[i] >= 0.0)) throw InputError("barrier values must be non-negative");
    }
    locator_ = GridLocator(y_);
}

Barrier Barrier::constant(std::vector<double> state_grid, double r, bool log_state) {
    std::vector<double> R(state_grid.size(), r);
    return Barrier(std::move(state_grid), std::move(R), log_state);
}

Barrier Barrier::from_function(std::vector<double> state_grid, const std::function<double(double)>& R,
                               bool log_state) {
    std::vector<double> values(state_grid.size());
    for (std::size_t i = 0; i < state_grid.size(); ++i)
        values[i] = R(log_state ? std::exp(state_grid[i]) : state_grid[i]);
    return Barrier(std::move(state_grid), std::move(values), log_state);
}

std::vector<double> Barrier::natural_grid() const {
    std::vector<double> x(y_);
    if (log_state_)
        for (auto& v : x) v = std::exp(v);
    return x;
}

double Barrier::lookup_state(double y) const {
    const long k = locator_.locate(y);
    if (k < 0) return 0.0;
    const auto i = static_cast<std::size_t>(k);
    if (i + 1 >= y_.size()) return y == y_.back() ? R_.back() : 0.0;
    if (y == y_[i]) return R_[i];
    return std::min(R_[i], R_[i + 1]);
}

double Barrier::lookup(double x) const {
    if (log_state_) return x > 0.0 ? lookup_state(std::log(x)) : 0.0;
    return lookup_state(x);
}

double Barrier::max_finite_on(Interval natural) const {
    double best = 0.0;
    for (std::size_t i = 0; i < y_.size(); ++i) {
        const double x = log_state_ ? std::exp(y_[i]) : y_[i];
        if (x < natural.lo || x > natural.hi || !std::isfinite(R_[i])) continue;
        best = std::max(best, R_[i]);
    }
    return best;
}

Barrier extract_barrier(const ObstacleSolution& sol, std::optional<double> contact_tol, bool refine) {
    const double tol = contact_tol.value_or(10.0 * sol.config.lcp_tolerance);
    const auto& y = sol.grid.y;
    const std::size_t n = y.size();
    std::vector<double> R(n, Barrier::never);
    std::size_t violations = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double local = tol * std::max(1.0, std::abs(sol.psi[i]));
        auto gap = [&](std::size_t j) { return sol.v(i, j) - sol.psi[i]; };
        bool in_contact = false, flicker = false;
        for (std::size_t j = 0; j < sol.t.size(); ++j) {
            const bool c = gap(j) <= local;
            if (c && !in_contact && !std::isfinite(R[i])) {
                R[i] = sol.t[j];
                // The gap closes linearly in t; place its zero inside (t_{j-1}, t_j].
                if (refine && j >= 2) {
                    const double g1 = gap(j - 1), slope = gap(j - 2) - g1;
                    if (g1 > 0.0 && slope > 0.0)
                        R[i] = sol.t[j - 1] + std::min(g1 / slope, 1.0) * (sol.t[j] - sol.t[j - 1]);
                }
            }
            if (!c && in_contact) flicker = true;
            in_contact = in_contact || c;
        }
        if (flicker) ++violations;
        const double x = sol.grid.log_state ? std::exp(y[i]) : y[i];
        if (x < sol.grid.target_support.lo || x > sol.grid.target_support.hi) R[i] = 0.0;
    }
    Barrier b(y, std::move(R), sol.grid.log_state, tol);
    b.violations_ = violations;
    return b;
}

std::size_t hit_time(const Barrier& barrier, std::span<const double> times, std::span<const double> states) {
    const std::size_t n = std::min(times.size(), states.size());
    for (std::size_t k = 1; k < n; ++k)
        if (Barrier::reached(times[k], barrier.lookup(states[k]))) return k;
    return times.size();
}

}  // namespace rootbarrier
