#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rootbarrier/barrier.hpp"
#include "rootbarrier/diffusion.hpp"
#include "rootbarrier/measures.hpp"
#include "rootbarrier/rng.hpp"

namespace rootbarrier {

/// Path loops run either on the calling thread or across OpenMP threads.
/// Both produce bit-identical results.
enum class Execution { serial, parallel };

struct SimulationConfig {
    std::size_t n_paths = 10000;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    /// Horizon sentinel; paths still alive here are stopped and flagged.
    double horizon = 10.0;
    bool keep_paths = false;
    Execution execution = Execution::parallel;

    void validate() const;
};

struct PathBatch {
    std::size_t n_paths = 0;
    double dt = 0.0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> start_values;
    std::vector<double> stop_times;
    std::vector<double> stopped_values;
    std::vector<std::uint8_t> at_horizon;
    /// Natural-coordinate samples per path (only with keep_paths).
    std::vector<std::vector<double>> states;
    /// Price-model extras.
    std::vector<double> realized_variance;
    std::vector<double> hedge_gains;
    std::vector<std::uint8_t> aborted;

    [[nodiscard]] double horizon_mass() const;
    [[nodiscard]] bool horizon_warning() const { return horizon_mass() > 0.01; }
    [[nodiscard]] double mean_stop_time() const;
};

/// Simulates X from nu and stops it at the barrier. Exact increments when the
/// state volatility is constant, Euler-Maruyama otherwise.
[[nodiscard]] PathBatch simulate_stopped(const DiffusionSpec& diff, const Measure& nu, const Barrier& barrier,
                                         const SimulationConfig& cfg);

/// U(x) = -mean |X - x| by sorting and prefix sums.
[[nodiscard]] Potential empirical_potential(std::span<const double> values, std::span<const double> grid);
[[nodiscard]] Potential empirical_potential(const PathBatch& batch, std::span<const double> grid);

/// Stopped and unstopped samples of the same paths at a ladder of times.
struct LadderSample {
    std::vector<double> times;
    /// [rung * n + path]
    std::vector<double> stopped_x;
    std::vector<double> stopped_t;
    std::vector<double> free_x;
    std::vector<double> start_x;
    std::size_t n_paths = 0;
};

[[nodiscard]] LadderSample sample_ladder(const DiffusionSpec& diff, const Measure& nu, const Barrier& barrier,
                                         std::span<const double> times, const SimulationConfig& cfg);

/// Piecewise-constant short rate: rates[k] applies on [times[k], times[k+1]).
struct RateCurve {
    std::vector<double> times{0.0};
    std::vector<double> rates{0.0};

    static RateCurve flat(double r) { return {{0.0}, {r}}; }
    /// Integral of r over [0, t].
    [[nodiscard]] double integral(double t) const;
    /// Bank account B_t.
    [[nodiscard]] double growth(double t) const;
    void validate() const;
};

struct PriceModel {
    enum class Kind { constant, piecewise, time_change };

    Kind kind = Kind::constant;
    double s0 = 1.0;
    double maturity = 1.0;
    RateCurve rate;
    double vol = 0.2;
    /// Piecewise: vols[k] on [vol_times[k], vol_times[k+1]).
    std::vector<double> vol_times;
    std::vector<double> vols;
    /// Time change: Root barrier in log-price state, in its own clock u.
    std::shared_ptr<const Barrier> barrier;

    static PriceModel constant_vol(double s0, double maturity, double vol, RateCurve rate = {});
    static PriceModel piecewise_vol(double s0, double maturity, std::vector<double> times, std::vector<double> vols,
                                    RateCurve rate = {});
    /// X_t = Xtilde_{t/(T-t) ^ tau_D} with Xtilde a driftless geometric motion.
    static PriceModel time_change(double s0, double maturity, std::shared_ptr<const Barrier> barrier,
                                  RateCurve rate = {});

    [[nodiscard]] std::string name() const;
    void validate() const;
};

/// Holding in the discounted asset as a function of (X_t, realized variance so far).
using HoldingFn = std::function<double(double x, double tau)>;

/// Discounted prices X = S / B with pathwise realized variance sum (d ln S)^2.
/// For the time-change model `cfg.dt` is the step of the inner clock and
/// `cfg.horizon` caps it. With a holding function the discounted gains
/// sum phi (X_{k+1} - X_k) are recorded as well.
[[nodiscard]] PathBatch simulate_price_model(const PriceModel& model, const SimulationConfig& cfg,
                                             const HoldingFn* holding = nullptr);

}  // namespace rootbarrier
