#include "rootbarrier/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "rootbarrier/errors.hpp"

namespace rootbarrier {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

double std_normal_quantile(double p) {
    static const boost::math::normal_distribution<double> n01(0.0, 1.0);
    return boost::math::quantile(n01, p);
}

// Neumaier compensated sum.
double accurate_sum(std::span<const double> xs) {
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        double t = s + x;
        c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
        s = t;
    }
    return s + c;
}

// Mass and first moment of a linear-density cell [a, b] with end densities da, db.
double cell_mass(double a, double b, double da, double db) { return 0.5 * (b - a) * (da + db); }

double cell_first(double a, double b, double da, double db) {
    return (b - a) / 6.0 * (a * (2.0 * da + db) + b * (da + 2.0 * db));
}

}  // namespace

Measure Measure::atoms(std::vector<Atom> atoms) {
    if (atoms.empty()) throw InputError("measure has no atoms");
    std::vector<double> masses;
    masses.reserve(atoms.size());
    for (const auto& a : atoms) {
        if (!std::isfinite(a.location)) throw InputError("infinite first moment");
        if (!(a.mass >= 0.0) || !std::isfinite(a.mass)) throw InputError("negative atom mass");
        masses.push_back(a.mass);
    }
    const double total = accurate_sum(masses);
    if (std::abs(total - 1.0) > 1e-12)
        throw InputError("atom masses sum to " + std::to_string(total) + ", expected 1");

    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    std::vector<Atom> merged;
    merged.reserve(atoms.size());
    for (const auto& a : atoms) {
        if (a.mass == 0.0) continue;
        if (!merged.empty() && merged.back().location == a.location)
            merged.back().mass += a.mass;
        else
            merged.push_back(a);
    }
    Measure m;
    m.kind_ = MeasureKind::atoms;
    m.atoms_ = std::move(merged);
    m.build_atom_index();
    return m;
}

Measure Measure::dirac(double location) { return atoms({{location, 1.0}}); }

Measure Measure::empirical(std::vector<double> samples) {
    if (samples.empty()) throw InputError("empirical measure needs samples");
    for (double s : samples)
        if (!std::isfinite(s)) throw InputError("infinite first moment");
    std::sort(samples.begin(), samples.end());
    const double w = 1.0 / static_cast<double>(samples.size());
    Measure m;
    m.kind_ = MeasureKind::atoms;
    for (std::size_t i = 0; i < samples.size();) {
        std::size_t j = i;
        while (j < samples.size() && samples[j] == samples[i]) ++j;
        m.atoms_.push_back({samples[i], w * static_cast<double>(j - i)});
        i = j;
    }
    m.build_atom_index();
    return m;
}

void Measure::build_atom_index() {
    const std::size_t n = atoms_.size();
    cum_mass_.assign(n + 1, 0.0);
    cum_first_.assign(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        cum_mass_[k + 1] = cum_mass_[k] + atoms_[k].mass;
        cum_first_[k + 1] = cum_first_[k] + atoms_[k].mass * atoms_[k].location;
    }
    mean_ = cum_first_[n];
    if (!std::isfinite(mean_)) throw InputError("infinite first moment");
    support_ = {atoms_.front().location, atoms_.back().location};
}

Measure Measure::normal(double mean, double variance) {
    if (!std::isfinite(mean) || !std::isfinite(variance)) throw InputError("infinite first moment");
    if (!(variance > 0.0)) throw InputError("normal variance must be positive");
    Measure m;
    m.kind_ = MeasureKind::normal;
    m.p1_ = mean;
    m.p2_ = variance;
    m.mean_ = mean;
    m.support_ = {-kInf, kInf};
    return m;
}

Measure Measure::lognormal(double log_mean, double log_variance) {
    if (!(log_variance > 0.0)) throw InputError("lognormal log-variance must be positive");
    Measure m;
    m.kind_ = MeasureKind::lognormal;
    m.p1_ = log_mean;
    m.p2_ = log_variance;
    m.mean_ = std::exp(log_mean + 0.5 * log_variance);
    if (!std::isfinite(m.mean_)) throw InputError("infinite first moment");
    m.support_ = {0.0, kInf};
    return m;
}

Measure Measure::tabulated(std::vector<DensityPoint> table) {
    if (table.size() < 2) throw InputError("density table needs at least two points");
    for (std::size_t k = 0; k < table.size(); ++k) {
        if (!std::isfinite(table[k].x) || !std::isfinite(table[k].density))
            throw InputError("infinite first moment");
        if (table[k].density < 0.0) throw InputError("negative density value");
        if (k > 0 && !(table[k].x > table[k - 1].x))
            throw InputError("density table x must be strictly increasing");
    }
    double raw = 0.0;
    for (std::size_t k = 0; k + 1 < table.size(); ++k)
        raw += cell_mass(table[k].x, table[k + 1].x, table[k].density, table[k + 1].density);
    if (std::abs(raw - 1.0) > 1e-6)
        throw InputError("density table integrates to " + std::to_string(raw) + ", expected 1");
    for (auto& p : table) p.density /= raw;

    Measure m;
    m.kind_ = MeasureKind::tabulated_density;
    m.table_ = std::move(table);
    const std::size_t n = m.table_.size();
    m.cell_mass_.assign(n, 0.0);
    m.cell_first_.assign(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const auto& a = m.table_[k];
        const auto& b = m.table_[k + 1];
        m.cell_mass_[k + 1] = m.cell_mass_[k] + cell_mass(a.x, b.x, a.density, b.density);
        m.cell_first_[k + 1] = m.cell_first_[k] + cell_first(a.x, b.x, a.density, b.density);
    }
    m.mean_ = m.cell_first_[n - 1];
    m.support_ = {m.table_.front().x, m.table_.back().x};
    return m;
}

std::string Measure::kind_name() const {
    switch (kind_) {
        case MeasureKind::atoms: return "atoms";
        case MeasureKind::tabulated_density: return "tabulated-density";
        case MeasureKind::normal: return "normal";
        case MeasureKind::lognormal: return "lognormal";
    }
    return "unknown";
}

double Measure::variance() const {
    switch (kind_) {
        case MeasureKind::normal: return p2_;
        case MeasureKind::lognormal: return std::expm1(p2_) * std::exp(2.0 * p1_ + p2_);
        case MeasureKind::atoms: {
            double v = 0.0;
            for (const auto& a : atoms_) v += a.mass * (a.location - mean_) * (a.location - mean_);
            return v;
        }
        case MeasureKind::tabulated_density:
            return expectation([this](double y) { return (y - mean_) * (y - mean_); });
    }
    return 0.0;
}

Interval Measure::quantile_range(double tail_mass) const {
    switch (kind_) {
        case MeasureKind::normal:
        case MeasureKind::lognormal: return {quantile(tail_mass), quantile(1.0 - tail_mass)};
        default: return support_;
    }
}

double Measure::cdf_below(double x) const {
    switch (kind_) {
        case MeasureKind::atoms: {
            auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                                       [](const Atom& a, double v) { return a.location < v; });
            return cum_mass_[static_cast<std::size_t>(it - atoms_.begin())];
        }
        default: return cdf(x);
    }
}

double Measure::cdf(double x) const {
    switch (kind_) {
        case MeasureKind::normal: return std_normal_cdf((x - p1_) / std::sqrt(p2_));
        case MeasureKind::lognormal:
            return x <= 0.0 ? 0.0 : std_normal_cdf((std::log(x) - p1_) / std::sqrt(p2_));
        case MeasureKind::atoms: {
            auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x,
                                       [](double v, const Atom& a) { return v < a.location; });
            return std::min(1.0, cum_mass_[static_cast<std::size_t>(it - atoms_.begin())]);
        }
        case MeasureKind::tabulated_density: {
            if (x <= table_.front().x) return 0.0;
            if (x >= table_.back().x) return 1.0;
            auto it = std::upper_bound(table_.begin(), table_.end(), x,
                                       [](double v, const DensityPoint& p) { return v < p.x; });
            const std::size_t k = static_cast<std::size_t>(it - table_.begin()) - 1;
            const auto& a = table_[k];
            const auto& b = table_[k + 1];
            const double dx = a.density + (b.density - a.density) * (x - a.x) / (b.x - a.x);
            return cell_mass_[k] + cell_mass(a.x, x, a.density, dx);
        }
    }
    return 0.0;
}

double Measure::partial_first_moment(double x) const {
    switch (kind_) {
        case MeasureKind::normal: {
            const double s = std::sqrt(p2_);
            const double z = (x - p1_) / s;
            return p1_ * std_normal_cdf(z) - s * std_normal_pdf(z);
        }
        case MeasureKind::lognormal: {
            if (x <= 0.0) return 0.0;
            return mean_ * std_normal_cdf((std::log(x) - p1_ - p2_) / std::sqrt(p2_));
        }
        case MeasureKind::atoms: {
            auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                                       [](const Atom& a, double v) { return a.location < v; });
            return cum_first_[static_cast<std::size_t>(it - atoms_.begin())];
        }
        case MeasureKind::tabulated_density: {
            if (x <= table_.front().x) return 0.0;
            if (x >= table_.back().x) return mean_;
            auto it = std::upper_bound(table_.begin(), table_.end(), x,
                                       [](double v, const DensityPoint& p) { return v < p.x; });
            const std::size_t k = static_cast<std::size_t>(it - table_.begin()) - 1;
            const auto& a = table_[k];
            const auto& b = table_[k + 1];
            const double dx = a.density + (b.density - a.density) * (x - a.x) / (b.x - a.x);
            return cell_first_[k] + cell_first(a.x, x, a.density, dx);
        }
    }
    return 0.0;
}

double Measure::abs_moment(double x) const {
    switch (kind_) {
        case MeasureKind::normal: {
            const double s = std::sqrt(p2_);
            const double z = (x - p1_) / s;
            return s * (2.0 * std_normal_pdf(z) + z * (2.0 * std_normal_cdf(z) - 1.0));
        }
        case MeasureKind::lognormal: {
            if (x <= 0.0) return mean_ - x;
            const double sd = std::sqrt(p2_);
            const double d1 = (p1_ + p2_ - std::log(x)) / sd;
            const double d2 = d1 - sd;
            const double put = x * std_normal_cdf(-d2) - mean_ * std_normal_cdf(-d1);
            return mean_ - x + 2.0 * put;
        }
        default: {
            const double F = cdf_below(x);
            const double A = partial_first_moment(x);
            // E[(x - Y); Y < x] + E[(Y - x); Y >= x], grouped to limit cancellation.
            const double below = x * F - A;
            const double above = (mean_ - A) - x * (1.0 - F);
            return std::max(0.0, below) + std::max(0.0, above);
        }
    }
}

double Measure::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) {
        if (p <= 0.0) return support_.lo;
        return support_.hi;
    }
    switch (kind_) {
        case MeasureKind::normal: return p1_ + std::sqrt(p2_) * std_normal_quantile(p);
        case MeasureKind::lognormal: return std::exp(p1_ + std::sqrt(p2_) * std_normal_quantile(p));
        case MeasureKind::atoms: {
            auto it = std::lower_bound(cum_mass_.begin() + 1, cum_mass_.end(), p);
            std::size_t k = static_cast<std::size_t>(it - cum_mass_.begin()) - 1;
            return atoms_[std::min(k, atoms_.size() - 1)].location;
        }
        case MeasureKind::tabulated_density: {
            double lo = table_.front().x, hi = table_.back().x;
            for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(lo)); ++it) {
                const double mid = 0.5 * (lo + hi);
                (cdf(mid) < p ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
    }
    return 0.0;
}

double Measure::expectation(const std::function<double(double)>& g) const {
    switch (kind_) {
        case MeasureKind::atoms: {
            double s = 0.0;
            for (const auto& a : atoms_) s += a.mass * g(a.location);
            return s;
        }
        case MeasureKind::normal:
        case MeasureKind::lognormal: {
            // Composite Simpson in the standard normal variable on [-12, 12].
            const int n = 8000;
            const double a = -12.0, h = 24.0 / n;
            const double sd = std::sqrt(p2_);
            double s = 0.0;
            for (int i = 0; i <= n; ++i) {
                const double z = a + h * i;
                const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
                const double y = kind_ == MeasureKind::normal ? p1_ + sd * z : std::exp(p1_ + sd * z);
                s += w * std_normal_pdf(z) * g(y);
            }
            return s * h / 3.0;
        }
        case MeasureKind::tabulated_density: {
            // 5-point Gauss-Legendre per cell.
            static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                         0.5384693101056831, 0.9061798459386640};
            static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                         0.4786286704993665, 0.2369268850561891};
            double s = 0.0;
            for (std::size_t k = 0; k + 1 < table_.size(); ++k) {
                const auto& a = table_[k];
                const auto& b = table_[k + 1];
                const double half = 0.5 * (b.x - a.x), mid = 0.5 * (a.x + b.x);
                for (int q = 0; q < 5; ++q) {
                    const double y = mid + half * gx[q];
                    const double d = a.density + (b.density - a.density) * (y - a.x) / (b.x - a.x);
                    s += half * gw[q] * d * g(y);
                }
            }
            return s;
        }
    }
    return 0.0;
}

double Measure::log_moment() const {
    if (!(support_.lo > 0.0) && kind_ != MeasureKind::lognormal)
        throw InputError("log moment needs positive support");
    if (kind_ == MeasureKind::lognormal) return p1_;
    return expectation([](double y) { return std::log(y); });
}

double Measure::sample(Rng& rng) const {
    switch (kind_) {
        case MeasureKind::normal: {
            NormalDist n(p1_, std::sqrt(p2_));
            return n(rng);
        }
        case MeasureKind::lognormal: {
            NormalDist n(p1_, std::sqrt(p2_));
            return std::exp(n(rng));
        }
        case MeasureKind::atoms: {
            if (atoms_.size() == 1) return atoms_.front().location;
            UniformDist u(0.0, cum_mass_.back());
            const double p = u(rng);
            auto it = std::upper_bound(cum_mass_.begin() + 1, cum_mass_.end(), p);
            std::size_t k = static_cast<std::size_t>(it - cum_mass_.begin()) - 1;
            return atoms_[std::min(k, atoms_.size() - 1)].location;
        }
        case MeasureKind::tabulated_density: {
            UniformDist u(0.0, 1.0);
            return quantile(u(rng));
        }
    }
    return 0.0;
}

Measure Measure::discretized(std::size_t n) const {
    if (kind_ == MeasureKind::atoms) return *this;
    if (n < 1) throw InputError("discretisation needs at least one cell");
    std::vector<Atom> out;
    out.reserve(n);
    double prev_A = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double A = k + 1 == n ? mean_ : partial_first_moment(quantile(double(k + 1) / n));
        out.push_back({(A - prev_A) * static_cast<double>(n), 1.0 / static_cast<double>(n)});
        prev_A = A;
    }
    Measure m;
    m.kind_ = MeasureKind::atoms;
    std::sort(out.begin(), out.end(), [](const Atom& a, const Atom& b) { return a.location < b.location; });
    m.atoms_ = std::move(out);
    m.build_atom_index();
    return m;
}

Measure Measure::shifted(double delta) const {
    Measure m = *this;
    switch (kind_) {
        case MeasureKind::normal:
            m.p1_ += delta;
            m.mean_ += delta;
            break;
        case MeasureKind::lognormal: throw InputError("a lognormal law cannot be shifted");
        case MeasureKind::atoms:
            for (auto& a : m.atoms_) a.location += delta;
            m.build_atom_index();
            break;
        case MeasureKind::tabulated_density: {
            std::vector<DensityPoint> t = table_;
            for (auto& p : t) p.x += delta;
            return tabulated(std::move(t));
        }
    }
    return m;
}

double Potential::max_second_difference() const {
    double worst = -kInf;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        const double hl = grid[i] - grid[i - 1], hr = grid[i + 1] - grid[i];
        const double d2 = ((values[i + 1] - values[i]) / hr - (values[i] - values[i - 1]) / hl);
        worst = std::max(worst, d2);
    }
    return worst;
}

double Potential::max_slope() const {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        worst = std::max(worst, std::abs(values[i + 1] - values[i]) / (grid[i + 1] - grid[i]));
    return worst;
}

Potential potential(const Measure& m, std::span<const double> grid) {
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw InputError("potential grid must be strictly increasing");
    Potential p;
    p.grid.assign(grid.begin(), grid.end());
    p.values.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) p.values[i] = m.potential_at(grid[i]);
    p.mean = m.mean();
    return p;
}

EmbeddabilityReport check_embeddable(const Measure& nu, const Measure& mu, double tolerance) {
    EmbeddabilityReport r;
    r.mean_gap = mu.mean() - nu.mean();
    const double scale = std::max({1.0, std::abs(mu.mean()), std::abs(nu.mean())});
    r.means_equal = std::abs(r.mean_gap) <= 1e-9 * scale;

    const Interval a = nu.quantile_range(1e-9);
    const Interval b = mu.quantile_range(1e-9);
    double lo = std::min(a.lo, b.lo), hi = std::max(a.hi, b.hi);
    const double margin = 0.1 * (hi - lo) + 1e-3 * scale;
    lo -= margin;
    hi += margin;
    std::vector<double> pts;
    const int n = 4000;
    for (int i = 0; i <= n; ++i) pts.push_back(lo + (hi - lo) * i / n);
    for (const auto& at : nu.atom_list()) pts.push_back(at.location);
    for (const auto& at : mu.atom_list()) pts.push_back(at.location);

    r.max_violation = -kInf;
    for (double x : pts) {
        const double v = mu.potential_at(x) - nu.potential_at(x);
        if (v > r.max_violation) {
            r.max_violation = v;
            r.at_x = x;
        }
    }
    r.pass = r.max_violation <= tolerance * scale && r.means_equal;
    return r;
}

Measure implied_measure_from_calls(std::vector<CallQuote> quotes, double spot, double growth) {
    if (!(spot > 0.0) || !std::isfinite(spot)) throw InputError("spot must be positive");
    if (!(growth > 0.0) || !std::isfinite(growth)) throw InputError("discount factor must be positive");
    if (quotes.empty()) throw MarketDataError("arbitrageable call curve: no quotes");
    for (const auto& q : quotes)
        if (!std::isfinite(q.strike) || !std::isfinite(q.price) || q.strike < 0.0 || q.price < 0.0)
            throw MarketDataError("arbitrageable call curve: invalid quote");
    std::sort(quotes.begin(), quotes.end(),
              [](const CallQuote& a, const CallQuote& b) { return a.strike < b.strike; });
    for (std::size_t k = 1; k < quotes.size(); ++k)
        if (quotes[k].strike == quotes[k - 1].strike)
            throw MarketDataError("arbitrageable call curve: duplicate strike");

    if (quotes.front().strike == 0.0) {
        if (std::abs(quotes.front().price - spot) > 1e-10 * spot)
            throw MarketDataError("call price at zero strike differs from spot");
    } else {
        quotes.insert(quotes.begin(), {0.0, spot});
    }

    const double tol = 1e-12;
    std::vector<double> slope;
    for (std::size_t k = 0; k + 1 < quotes.size(); ++k)
        slope.push_back((quotes[k + 1].price - quotes[k].price) / (quotes[k + 1].strike - quotes[k].strike));
    if (quotes.back().price > 0.0) {
        if (slope.empty() || !(slope.back() < 0.0))
            throw MarketDataError("arbitrageable call curve: calls do not decay to zero");
        const double k_star = quotes.back().strike - quotes.back().price / slope.back();
        quotes.push_back({k_star, 0.0});
        slope.push_back(slope.back());
    }
    for (std::size_t k = 0; k < slope.size(); ++k) {
        if (slope[k] > tol) throw MarketDataError("arbitrageable call curve: increasing in strike");
        if (k > 0 && slope[k] < slope[k - 1] - tol)
            throw MarketDataError("arbitrageable call curve: not convex in strike");
    }
    if (slope.front() < -1.0 / growth - tol)
        throw MarketDataError("arbitrageable call curve: slope below -discount at zero");
    const double zero_mass = 1.0 + growth * slope.front();
    if (zero_mass > 1e-8)
        throw MarketDataError("arbitrageable call curve: implied law has an atom at zero");

    std::vector<Atom> atoms;
    for (std::size_t k = 1; k < quotes.size(); ++k) {
        const double next = k < slope.size() ? slope[k] : 0.0;
        const double mass = growth * (next - slope[k - 1]);
        if (mass > 0.0) atoms.push_back({quotes[k].strike / growth, mass});
    }
    double total = 0.0;
    for (const auto& a : atoms) total += a.mass;
    for (auto& a : atoms) a.mass /= total;  // absorbs the dropped rounding-level mass at zero
    return Measure::atoms(std::move(atoms));
}

double ks_statistic(std::vector<double> samples, const Measure& law) {
    if (samples.empty()) return 0.0;
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size();) {
        std::size_t j = i;
        while (j < samples.size() && samples[j] == samples[i]) ++j;
        const double below = static_cast<double>(i) / n;
        const double upto = static_cast<double>(j) / n;
        d = std::max(d, std::abs(upto - law.cdf(samples[i])));
        d = std::max(d, std::abs(below - law.cdf_below(samples[i])));
        i = j;
    }
    return d;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) return 0.0;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_critical_1pct(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

}  // namespace rootbarrier
