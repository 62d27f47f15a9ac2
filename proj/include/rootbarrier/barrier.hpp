#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "rootbarrier/grid.hpp"
#include "rootbarrier/measures.hpp"
#include "rootbarrier/obstacle_solver.hpp"

namespace rootbarrier {

/// Root barrier B = {(x, t): t >= R(x)} tabulated on a state grid.
///
/// Between nodes R is the minimum of the two neighbours; outside the grid
/// R = 0. In the geometric case the grid is in ln x.
class Barrier {
public:
    static constexpr double never = std::numeric_limits<double>::infinity();

    Barrier() = default;
    Barrier(std::vector<double> state_grid, std::vector<double> R, bool log_state = false,
            double contact_tolerance = 0.0);

    static Barrier constant(std::vector<double> state_grid, double r, bool log_state = false);
    /// R evaluated at each node; `R` takes the natural coordinate.
    static Barrier from_function(std::vector<double> state_grid, const std::function<double(double)>& R,
                                 bool log_state = false);

    [[nodiscard]] const std::vector<double>& state_grid() const noexcept { return y_; }
    [[nodiscard]] std::vector<double> natural_grid() const;
    [[nodiscard]] const std::vector<double>& R() const noexcept { return R_; }
    [[nodiscard]] bool log_state() const noexcept { return log_state_; }
    [[nodiscard]] double contact_tolerance() const noexcept { return contact_tol_; }
    /// Nodes whose contact indicator switched off again during extraction.
    [[nodiscard]] std::size_t monotonicity_violations() const noexcept { return violations_; }

    /// Conservative R at a state-variable location.
    [[nodiscard]] double lookup_state(double y) const;
    /// Conservative R at a natural-coordinate location.
    [[nodiscard]] double lookup(double x) const;
    [[nodiscard]] bool origin_time_positive(double start) const { return lookup(start) > 0.0; }
    /// Largest finite R over nodes inside `natural`; 0 if none.
    [[nodiscard]] double max_finite_on(Interval natural) const;

    /// True when time t has reached R (with a rounding guard).
    [[nodiscard]] static bool reached(double t, double R) noexcept {
        return t + 1e-12 * (1.0 + t) >= R;
    }

private:
    friend Barrier extract_barrier(const ObstacleSolution&, std::optional<double>, bool);
    std::vector<double> y_;
    std::vector<double> R_;
    GridLocator locator_;
    bool log_state_ = false;
    double contact_tol_ = 0.0;
    std::size_t violations_ = 0;
};

/// R(x_i) = first t_j with v - psi <= contact_tol * max(1, |psi_i|).
/// Defaults to 10 x the solve's lcp tolerance. R = 0 outside the target's support.
/// With `refine`, R is moved back inside the step (t_{j-1}, t_j] to where the
/// gap v - psi, extrapolated linearly from t_{j-2} and t_{j-1}, reaches zero.
[[nodiscard]] Barrier extract_barrier(const ObstacleSolution& sol,
                                      std::optional<double> contact_tol = std::nullopt, bool refine = true);

/// First sample index k >= 1 with times[k] >= R(states[k]); `times.size()`
/// when the path never reaches the barrier. States are natural coordinates.
[[nodiscard]] std::size_t hit_time(const Barrier& barrier, std::span<const double> times,
                                   std::span<const double> states);

}  // namespace rootbarrier
