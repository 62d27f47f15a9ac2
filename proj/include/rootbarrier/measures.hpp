#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rootbarrier/rng.hpp"

namespace rootbarrier {

struct Interval {
    double lo;
    double hi;
};

struct Atom {
    double location;
    double mass;
};

struct DensityPoint {
    double x;
    double density;
};

enum class MeasureKind { atoms, tabulated_density, normal, lognormal };

/// Probability law on the real line.
///
/// Immutable after construction. Atoms are kept sorted with prefix sums so
/// potentials and CDFs of large empirical measures cost O(log n) per point.
class Measure {
public:
    static Measure atoms(std::vector<Atom> atoms);
    static Measure dirac(double location);
    /// Equal-mass atoms at the given samples (mass 1/n each, duplicates merged).
    static Measure empirical(std::vector<double> samples);
    static Measure normal(double mean, double variance);
    static Measure lognormal(double log_mean, double log_variance);
    /// Piecewise-linear density through the given points, zero outside.
    /// The table is renormalised; its raw mass must be within 1e-6 of one.
    static Measure tabulated(std::vector<DensityPoint> table);

    [[nodiscard]] MeasureKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::string kind_name() const;
    [[nodiscard]] double mean() const noexcept { return mean_; }
    [[nodiscard]] double variance() const;
    /// Closed support; infinite ends for the analytic families.
    [[nodiscard]] Interval support() const noexcept { return support_; }
    /// Interval outside which each tail carries at most `tail_mass`.
    [[nodiscard]] Interval quantile_range(double tail_mass) const;
    [[nodiscard]] bool positive_support() const noexcept { return support_.lo > 0.0; }

    [[nodiscard]] std::span<const Atom> atom_list() const noexcept { return atoms_; }
    [[nodiscard]] std::span<const DensityPoint> density_table() const noexcept { return table_; }
    [[nodiscard]] double normal_mean() const noexcept { return p1_; }
    [[nodiscard]] double normal_variance() const noexcept { return p2_; }
    [[nodiscard]] double log_mean() const noexcept { return p1_; }
    [[nodiscard]] double log_variance() const noexcept { return p2_; }

    /// E|Y - x|.
    [[nodiscard]] double abs_moment(double x) const;
    /// U(x) = -E|Y - x|.
    [[nodiscard]] double potential_at(double x) const { return -abs_moment(x); }
    /// P(Y <= x).
    [[nodiscard]] double cdf(double x) const;
    /// Left-continuous inverse of the CDF.
    [[nodiscard]] double quantile(double p) const;
    /// P(Y < x).
    [[nodiscard]] double cdf_below(double x) const;
    /// E[Y; Y < x].
    [[nodiscard]] double partial_first_moment(double x) const;
    /// E[g(Y)]: exact for atoms, quadrature otherwise.
    [[nodiscard]] double expectation(const std::function<double(double)>& g) const;
    /// E[ln Y]; requires positive support.
    [[nodiscard]] double log_moment() const;

    /// Draw one sample.
    [[nodiscard]] double sample(Rng& rng) const;

    /// Mean-preserving discretisation: `n` equal-probability quantile cells,
    /// each collapsed to its conditional mean. Atomic laws are returned as-is.
    [[nodiscard]] Measure discretized(std::size_t n) const;

    /// Shift every location by `delta`.
    [[nodiscard]] Measure shifted(double delta) const;

private:
    Measure() = default;
    void build_atom_index();

    MeasureKind kind_ = MeasureKind::atoms;
    double p1_ = 0.0;
    double p2_ = 0.0;
    double mean_ = 0.0;
    Interval support_{0.0, 0.0};
    std::vector<Atom> atoms_;
    std::vector<double> cum_mass_;   // mass of atoms [0, k)
    std::vector<double> cum_first_;  // sum of mass*location of atoms [0, k)
    std::vector<DensityPoint> table_;
    std::vector<double> cell_mass_;   // mass of table cells [0, k)
    std::vector<double> cell_first_;  // first moment of table cells [0, k)
};

/// Tabulated potential function.
struct Potential {
    std::vector<double> grid;
    std::vector<double> values;
    double slope_left = 1.0;
    double slope_right = -1.0;
    double mean = 0.0;

    [[nodiscard]] double max_second_difference() const;
    [[nodiscard]] double max_slope() const;
};

[[nodiscard]] Potential potential(const Measure& m, std::span<const double> grid);

struct EmbeddabilityReport {
    bool pass = false;
    double max_violation = 0.0;  // max_x U_mu(x) - U_nu(x)
    double at_x = 0.0;
    double mean_gap = 0.0;
    bool means_equal = false;
};

/// Checks U_nu >= U_mu on a grid covering both supports plus every atom;
/// `tolerance` is relative to max(1, |means|).
[[nodiscard]] EmbeddabilityReport check_embeddable(const Measure& nu, const Measure& mu,
                                                   double tolerance = 1e-10);

struct CallQuote {
    double strike;
    double price;
};

/// Law of the discounted terminal price B_T^{-1} S_T implied by a call curve.
///
/// `growth` is the bank account B_T (so 1/growth is the discount factor).
/// Calls are interpolated linearly between strikes, which makes the law
/// atomic with atoms at strike / growth. A curve ending above zero is
/// extended with its last slope until it reaches zero.
[[nodiscard]] Measure implied_measure_from_calls(std::vector<CallQuote> quotes, double spot,
                                                 double growth);

/// One-sample Kolmogorov-Smirnov statistic of `samples` against `law`.
[[nodiscard]] double ks_statistic(std::vector<double> samples, const Measure& law);
/// Two-sample Kolmogorov-Smirnov statistic.
[[nodiscard]] double ks_statistic(std::vector<double> a, std::vector<double> b);
/// Asymptotic 1% critical value for a one-sample test of size n.
[[nodiscard]] double ks_critical_1pct(std::size_t n);

}  // namespace rootbarrier
