#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rootbarrier/barrier.hpp"
#include "rootbarrier/diffusion.hpp"
#include "rootbarrier/grid.hpp"
#include "rootbarrier/measures.hpp"
#include "rootbarrier/simulate.hpp"

namespace rootbarrier {

/// Convex increasing F with F(0) = 0 and right derivative f.
class PayoffSpec {
public:
    enum class Kind { variance_call, power, custom_table };

    /// F(t) = (t - K)+.
    static PayoffSpec variance_call(double strike);
    /// F(t) = scale * t^p, p >= 1.
    static PayoffSpec power(double p, double scale = 1.0);
    /// F(t) = t.
    static PayoffSpec variance_swap() { return power(1.0); }
    /// f piecewise linear through (times, f_values), constant after the last time.
    static PayoffSpec custom_table(std::vector<double> times, std::vector<double> f_values);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double F(double t) const;
    [[nodiscard]] double f(double t) const;
    /// sup f; infinite when unbounded and uncapped.
    [[nodiscard]] double f_bound() const;
    [[nodiscard]] bool bounded() const { return std::isfinite(f_bound()); }
    /// f replaced by min(f, N), F by its integral.
    [[nodiscard]] PayoffSpec capped(double N) const;
    [[nodiscard]] bool is_capped() const noexcept { return std::isfinite(cap_); }
    [[nodiscard]] std::string describe() const;

private:
    [[nodiscard]] double raw_F(double t) const;
    [[nodiscard]] double raw_f(double t) const;

    Kind kind_ = Kind::power;
    double a_ = 1.0;  // strike or exponent
    double b_ = 1.0;  // scale
    std::vector<double> times_;
    std::vector<double> fvals_;
    std::vector<double> Fcum_;
    double cap_ = std::numeric_limits<double>::infinity();
    double cap_time_ = std::numeric_limits<double>::infinity();
};

/// Tabulated hedging functions on the barrier's grid (natural coordinates).
///
/// J(x, t) = int_0^{t ^ R(x)} (M - f) ds, so G = F(t) + J - Z and H = Z - J(x, R(x)).
struct HedgeFunctions {
    std::vector<double> x;
    std::vector<double> t;
    bool log_state = false;
    double base_point = 0.0;
    GridFunction M;
    GridFunction J;
    GridFunction G;
    /// dG/dx, averaging one-sided differences at kinks.
    GridFunction delta;
    std::vector<double> Z;
    std::vector<double> Z_slope;
    std::vector<double> J_at_R;
    std::vector<double> H;
    std::vector<double> R;
    /// Payoff actually hedged (capped when f is unbounded).
    PayoffSpec payoff;
    /// Extension of Z beyond the grid, where M(., 0) = f(0).
    double f0 = 0.0;
    double sigma_left = 1.0;
    double sigma_right = 1.0;
    /// Nodes whose barrier lies beyond the horizon.
    std::size_t truncated_nodes = 0;

    [[nodiscard]] double T_max() const { return t.back(); }
    [[nodiscard]] double Z_at(double x) const;
    [[nodiscard]] double Z_slope_at(double x) const;
    [[nodiscard]] double H_at(double x) const;
    [[nodiscard]] double G_at(double x, double t) const;
    [[nodiscard]] double delta_at(double x, double t) const;
};

/// M(x, t) = E^{(x,t)} f(tau_D) by a backward implicit scheme fitted to the
/// barrier in time and space. The grid is the barrier's state grid and
/// `nt` uniform steps on [0, T_max].
[[nodiscard]] GridFunction compute_M(const DiffusionSpec& diff, const Barrier& barrier, const PayoffSpec& payoff,
                                     double T_max, std::size_t nt);

/// Z with Z(base) = Z'(base) = 0 and Z'' = 2 M(., 0) / sigma^2, integrating the
/// piecewise-linear interpolant of the integrand exactly. Returns Z and Z'.
struct ZFunction {
    std::vector<double> Z;
    std::vector<double> slope;
};
[[nodiscard]] ZFunction compute_Z(std::span<const double> M0, const DiffusionSpec& diff,
                                  std::span<const double> x_natural, double base_point);

[[nodiscard]] HedgeFunctions compute_G_H(const GridFunction& M, const ZFunction& Z, const DiffusionSpec& diff,
                                         const Barrier& barrier, const PayoffSpec& payoff, double base_point);

/// Full pipeline: caps f when unbounded, chooses T_max = 4 x the largest
/// finite R on the target support unless given, and computes M, Z, G, H.
struct HedgeConfig {
    double T_max = 0.0;  // 0 selects automatically
    std::size_t nt = 2000;
    double base_point = 0.0;
    Interval support{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
};
[[nodiscard]] HedgeFunctions build_hedge(const DiffusionSpec& diff, const Barrier& barrier, const PayoffSpec& payoff,
                                         const HedgeConfig& cfg);

struct PathwiseReport {
    bool pass = false;
    double max_gap = 0.0;          // max G + H - F over all nodes
    double max_contact_gap = 0.0;  // max |G + H - F| on t >= R
    double tolerance = 0.0;
    double at_x = 0.0;
    double at_t = 0.0;
};

[[nodiscard]] PathwiseReport verify_pathwise(const HedgeFunctions& hf, double tolerance = 1e-6);

struct MartingaleReport {
    std::vector<double> times;
    double start_mean = 0.0;
    std::vector<double> stopped_mean, stopped_diff_se;
    std::vector<double> free_mean, free_increment_se;
    bool stopped_constant = false;
    bool free_nondecreasing = false;
    [[nodiscard]] bool pass() const { return stopped_constant && free_nondecreasing; }
};

[[nodiscard]] MartingaleReport verify_martingale(const HedgeFunctions& hf, const DiffusionSpec& diff,
                                                 const Barrier& barrier, const Measure& nu,
                                                 std::span<const double> ladder, const SimulationConfig& cfg);

/// Randomised two-point embedding repeated over `stages`: each stage embeds a
/// fresh draw of the centred law `increment` from the current position by
/// exiting a random interval. Starts at `start`.
[[nodiscard]] PathBatch simulate_randomized_interval(const Measure& increment, double start, std::size_t stages,
                                                     const SimulationConfig& cfg);

struct OptimalityReport {
    double root_mean = 0.0, root_se = 0.0;
    double competitor_mean = 0.0, competitor_se = 0.0;
    /// Mean of G(X_tau, tau) + H(X_tau) along the competitor.
    double competitor_bound_mean = 0.0, competitor_bound_se = 0.0;
    double competitor_ks = 0.0, ks_critical = 0.0;
    bool pass = false;
};

/// Compares E F over Root's batch and a competitor batch embedding the same
/// law. Throws InputError when the competitor fails the KS embedding test.
[[nodiscard]] OptimalityReport optimality_gap(const HedgeFunctions& hf, const PayoffSpec& payoff,
                                              const PathBatch& root, const PathBatch& competitor,
                                              const Measure& mu);

/// Sample mean and standard error.
struct MeanSE {
    double mean;
    double se;
};
[[nodiscard]] MeanSE mean_se(std::span<const double> v);

}  // namespace rootbarrier
