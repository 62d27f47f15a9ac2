#include "rootbarrier/obstacle_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rootbarrier/errors.hpp"

namespace rootbarrier {

namespace {

constexpr double kGaussX[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                               0.9061798459386640};
constexpr double kGaussW[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                               0.4786286704993665, 0.2369268850561891};

// Integrate g over [a, b], splitting at 0 where |y| has its kink.
template <class G>
double integrate_cell(double a, double b, G&& g) {
    auto gl = [&](double lo, double hi) {
        const double half = 0.5 * (hi - lo), mid = 0.5 * (lo + hi);
        double s = 0.0;
        for (int q = 0; q < 5; ++q) s += kGaussW[q] * g(mid + half * kGaussX[q]);
        return s * half;
    };
    if (a < 0.0 && b > 0.0) return gl(a, 0.0) + gl(0.0, b);
    return gl(a, b);
}

void check_embeddable_or_throw(const Measure& nu, const Measure& mu) {
    const auto rep = check_embeddable(nu, mu);
    if (!rep.pass) {
        throw InputError("target is not embeddable from the initial law: max(U_mu - U_nu) = " +
                         std::to_string(rep.max_violation) + " at x = " + std::to_string(rep.at_x) +
                         ", mean gap = " + std::to_string(rep.mean_gap));
    }
}

}  // namespace

void SolverConfig::validate(bool geometric) const {
    if (nx < 3) throw InputError("nx must be at least 3");
    if (nt < 1) throw InputError("nt must be at least 1");
    if (!(T > 0.0)) throw InputError("T must be positive");
    if (!(lambda > 0.0)) throw InputError("lambda must be positive");
    if (geometric && !(lambda > 0.5)) throw InputError("lambda must exceed 1/2 in the geometric case");
    if (!(lcp_tolerance > 0.0)) throw InputError("lcp tolerance must be positive");
    if (max_iterations < 1) throw InputError("max iterations must be positive");
    if (x_range && !(x_range->hi > x_range->lo)) throw InputError("x range is empty");
    if (geometric && x_range && !(x_range->lo > 0.0))
        throw InputError("geometric x range must be positive");
}

StateGrid make_state_grid(const DiffusionSpec& diff, const Measure& nu, const Measure& mu,
                          const SolverConfig& cfg) {
    const bool geo = diff.is_geometric();
    cfg.validate(geo);
    if (geo && !(nu.support().lo > 0.0 && mu.support().lo >= 0.0 &&
                 (mu.kind() == MeasureKind::lognormal || mu.support().lo > 0.0)))
        throw InputError("geometric case needs laws supported on (0, inf)");

    double lo, hi;
    if (cfg.x_range) {
        lo = diff.to_state(cfg.x_range->lo);
        hi = diff.to_state(cfg.x_range->hi);
    } else {
        const Interval a = nu.quantile_range(cfg.tail_mass);
        const Interval b = mu.quantile_range(cfg.tail_mass);
        lo = diff.to_state(std::min(a.lo, b.lo));
        hi = diff.to_state(std::max(a.hi, b.hi));
        double margin = 0.1 * (hi - lo);
        if (margin == 0.0) margin = 1.0;
        lo -= margin;
        hi += margin;
    }

    StateGrid g;
    g.log_state = geo;
    g.target_support = mu.support();
    const std::size_t n = cfg.nx;
    const double h = (hi - lo) / static_cast<double>(n - 1);
    g.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) g.y[i] = lo + h * static_cast<double>(i);
    g.y.back() = hi;

    if (cfg.snap_to_atoms) {
        std::vector<double> special;
        for (const auto& a : nu.atom_list()) special.push_back(diff.to_state(a.location));
        for (const auto& a : mu.atom_list()) special.push_back(diff.to_state(a.location));
        if (!geo) special.push_back(0.0);
        std::sort(special.begin(), special.end());
        special.erase(std::unique(special.begin(), special.end()), special.end());
        if (special.size() <= n / 4) {
            std::vector<bool> moved(n, false);
            for (double s : special) {
                if (!(s > lo + h && s < hi - h)) continue;
                const auto i = static_cast<std::size_t>(std::llround((s - lo) / h));
                if (i < 1 || i + 1 >= n || moved[i]) continue;
                if (s - g.y[i - 1] < 0.25 * h || g.y[i + 1] - s < 0.25 * h) continue;
                g.y[i] = s;
                moved[i] = true;
            }
        }
    }
    return g;
}

std::vector<double> ObstacleSolution::natural_x() const {
    std::vector<double> out(grid.y);
    if (grid.log_state)
        for (auto& v : out) v = std::exp(v);
    return out;
}

DiscreteProblem assemble(const DiffusionSpec& diff, const Measure& nu, const Measure& mu,
                         const SolverConfig& cfg) {
    check_embeddable_or_throw(nu, mu);
    DiscreteProblem p;
    p.config = cfg;
    p.grid = make_state_grid(diff, nu, mu, cfg);
    p.diffusion = diff.name();
    const auto& y = p.grid.y;
    const std::size_t n = y.size();
    const double lambda = cfg.lambda;

    if (!diff.is_geometric()) {
        const auto b = diff.bounds_on({y.front(), y.back()});
        if (!(b.lower > 0.0)) throw InputError("sigma must be bounded away from zero on the domain");
    }

    p.lower.assign(n, 0.0);
    p.diag.assign(n, 0.0);
    p.upper.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double xl = y[i - 1], xi = y[i], xr = y[i + 1];
        const double hl = xi - xl, hr = xr - xi;
        // Weight rescaled by its value at the node; the row normalisation cancels it.
        auto rho = [&](double s) { return std::exp(-2.0 * lambda * (std::abs(s) - std::abs(xi))); };
        auto phi_l = [&](double s) { return (s - xl) / hl; };
        auto phi_r = [&](double s) { return (xr - s) / hr; };
        const double ia_l = integrate_cell(xl, xi, [&](double s) { return rho(s) * diff.coefficients(s, lambda).a; });
        const double ia_r = integrate_cell(xi, xr, [&](double s) { return rho(s) * diff.coefficients(s, lambda).a; });
        const double ib_l =
            integrate_cell(xl, xi, [&](double s) { return rho(s) * diff.coefficients(s, lambda).b * phi_l(s); });
        const double ib_r =
            integrate_cell(xi, xr, [&](double s) { return rho(s) * diff.coefficients(s, lambda).b * phi_r(s); });
        const double mass = integrate_cell(xl, xi, [&](double s) { return rho(s) * phi_l(s); }) +
                            integrate_cell(xi, xr, [&](double s) { return rho(s) * phi_r(s); });
        const double l = (-ia_l / (hl * hl) - ib_l / hl) / mass;
        const double u = (-ia_r / (hr * hr) + ib_r / hr) / mass;
        if (l > 0.0 || u > 0.0)
            throw InputError("grid too coarse: discrete operator loses the M-matrix property at node " +
                             std::to_string(i));
        p.lower[i] = l;
        p.upper[i] = u;
        p.diag[i] = -(l + u);
    }

    p.psi.resize(n);
    p.initial.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = diff.to_natural(y[i]);
        p.psi[i] = mu.potential_at(x);
        p.initial[i] = nu.potential_at(x);
    }
    return p;
}

ObstacleSolution solve(const DiscreteProblem& p) {
    const auto& cfg = p.config;
    const std::size_t n = p.grid.y.size();
    const std::size_t nt = cfg.nt;
    const double dt = cfg.T / static_cast<double>(nt);

    ObstacleSolution sol;
    sol.config = cfg;
    sol.grid = p.grid;
    sol.psi = p.psi;
    sol.t.resize(nt + 1);
    for (std::size_t j = 0; j <= nt; ++j) sol.t[j] = dt * static_cast<double>(j);
    sol.t.back() = cfg.T;
    sol.v = GridFunction(p.grid.y, sol.t);
    sol.residual.assign(n, 0.0);

    double psi_max = 0.0;
    for (double v : p.psi) psi_max = std::max(psi_max, std::abs(v));
    const double scale = std::max(1.0, psi_max);
    const double tol = cfg.lcp_tolerance * scale;
    // Per-step slack accumulates over the march, so sweep well below the bound.
    const double target = 0.01 * tol;

    std::vector<double> v(p.initial), rhs(n), bl(n), bd(n), bu(n);
    std::copy(v.begin(), v.end(), sol.v.row(0).begin());

    // Jacobi spectral radius bound gives the SOR relaxation factor.
    auto relaxation = [&](double theta) {
        double rho = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double off = theta * dt * (std::abs(p.lower[i]) + std::abs(p.upper[i]));
            rho = std::max(rho, off / (1.0 + theta * dt * p.diag[i]));
        }
        rho *= std::cos(M_PI / static_cast<double>(n - 1));
        const double w = 2.0 / (1.0 + std::sqrt(std::max(0.0, 1.0 - rho * rho)));
        return std::min(w, 1.9);
    };

    const double w_implicit = relaxation(1.0);
    const double w_cn = relaxation(0.5);

    for (std::size_t j = 1; j <= nt; ++j) {
        // Two fully implicit start-up steps damp the kink of the initial data.
        const bool cn = cfg.scheme == TimeScheme::crank_nicolson_projected && j > 2;
        const double theta = cn ? 0.5 : 1.0;
        const double omega = cn ? w_cn : w_implicit;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            bl[i] = theta * dt * p.lower[i];
            bu[i] = theta * dt * p.upper[i];
            bd[i] = 1.0 + theta * dt * p.diag[i];
            rhs[i] = v[i];
            if (cn)
                rhs[i] -= 0.5 * dt * (p.lower[i] * v[i - 1] + p.diag[i] * v[i] + p.upper[i] * v[i + 1]);
        }
        v.front() = p.psi.front();
        v.back() = p.psi.back();
        for (std::size_t i = 1; i + 1 < n; ++i) v[i] = std::max(v[i], p.psi[i]);

        std::size_t sweeps = 0;
        double worst = 0.0;
        std::size_t worst_node = 0;
        for (;;) {
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double gs = (rhs[i] - bl[i] * v[i - 1] - bu[i] * v[i + 1]) / bd[i];
                v[i] = std::max(p.psi[i], v[i] + omega * (gs - v[i]));
            }
            ++sweeps;
            worst = 0.0;
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double r = bl[i] * v[i - 1] + bd[i] * v[i] + bu[i] * v[i + 1] - rhs[i];
                const double c = std::abs(std::min(v[i] - p.psi[i], r));
                if (c > worst) {
                    worst = c;
                    worst_node = i;
                }
            }
            if (worst <= target) break;
            if (sweeps >= cfg.max_iterations)
                throw SolverError("projected SOR did not converge at time step " + std::to_string(j) +
                                      ": residual " + std::to_string(worst / scale) + " at node " +
                                      std::to_string(worst_node),
                                  worst / scale, worst_node);
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double r = bl[i] * v[i - 1] + bd[i] * v[i] + bu[i] * v[i + 1] - rhs[i];
            sol.residual[i] = std::max(sol.residual[i], std::abs(std::min(v[i] - p.psi[i], r)) / scale);
        }
        sol.total_sweeps += sweeps;
        sol.max_sweeps = std::max(sol.max_sweeps, sweeps);
        std::copy(v.begin(), v.end(), sol.v.row(j).begin());
    }
    sol.max_residual = *std::max_element(sol.residual.begin(), sol.residual.end());
    return sol;
}

GridFunction optimal_stopping_oracle(const DiffusionSpec& diff, const Measure& nu, const Measure& mu,
                                     const SolverConfig& cfg) {
    check_embeddable_or_throw(nu, mu);
    const StateGrid g = make_state_grid(diff, nu, mu, cfg);
    const auto& y = g.y;
    const std::size_t n = y.size();
    const double dt = cfg.T / static_cast<double>(cfg.nt);

    std::vector<double> psi(n), value(n), pu(n, 0.0), pd(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = diff.to_natural(y[i]);
        psi[i] = mu.potential_at(x);
        value[i] = nu.potential_at(x);
    }

    // Rates of the central generator; the substep keeps the middle weight >= 0.
    std::vector<double> rate_u(n, 0.0), rate_d(n, 0.0);
    double max_rate = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = y[i] - y[i - 1], hr = y[i + 1] - y[i], hs = hl + hr;
        const double a = diff.state_diffusion(y[i]), c = diff.state_drift(y[i]);
        rate_u[i] = 2.0 * a / (hr * hs) + c / hs;
        rate_d[i] = 2.0 * a / (hl * hs) - c / hs;
        if (rate_u[i] < 0.0 || rate_d[i] < 0.0)
            throw InputError("grid too coarse for the trinomial oracle at node " + std::to_string(i));
        max_rate = std::max(max_rate, rate_u[i] + rate_d[i]);
    }
    const auto substeps = static_cast<std::size_t>(std::ceil(dt * max_rate / 0.95));
    const double ds = dt / static_cast<double>(std::max<std::size_t>(1, substeps));
    for (std::size_t i = 1; i + 1 < n; ++i) {
        pu[i] = ds * rate_u[i];
        pd[i] = ds * rate_d[i];
    }

    std::vector<double> t(cfg.nt + 1);
    for (std::size_t j = 0; j <= cfg.nt; ++j) t[j] = dt * static_cast<double>(j);
    GridFunction out(y, t);
    std::copy(value.begin(), value.end(), out.row(0).begin());
    std::vector<double> next(n);
    for (std::size_t j = 1; j <= cfg.nt; ++j) {
        for (std::size_t s = 0; s < std::max<std::size_t>(1, substeps); ++s) {
            next.front() = psi.front();
            next.back() = psi.back();
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double cont = pu[i] * value[i + 1] + pd[i] * value[i - 1] + (1.0 - pu[i] - pd[i]) * value[i];
                next[i] = std::max(psi[i], cont);
            }
            value.swap(next);
        }
        std::copy(value.begin(), value.end(), out.row(j).begin());
    }
    return out;
}

}  // namespace rootbarrier
