#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rootbarrier/diffusion.hpp"
#include "rootbarrier/grid.hpp"
#include "rootbarrier/measures.hpp"

namespace rootbarrier {

enum class TimeScheme { implicit_projected, crank_nicolson_projected };

struct SolverConfig {
    /// Natural-coordinate range; chosen from the measures' quantiles when empty.
    std::optional<Interval> x_range;
    std::size_t nx = 401;
    double T = 2.0;
    std::size_t nt = 800;
    /// Exponential weight exp(-2 lambda |y|); must exceed 1/2 in the geometric case.
    double lambda = 1.0;
    TimeScheme scheme = TimeScheme::implicit_projected;
    /// Relative complementarity tolerance (scaled by max(1, |psi|_inf)).
    double lcp_tolerance = 1e-8;
    std::size_t max_iterations = 50000;
    /// Tail mass cut off when the range is chosen automatically.
    double tail_mass = 1e-9;
    /// Move grid nodes onto atoms of nu and mu when there are few of them.
    bool snap_to_atoms = true;

    void validate(bool geometric) const;
};

/// Grid in the state variable (ln x in the geometric case).
struct StateGrid {
    std::vector<double> y;
    bool log_state = false;
    /// Natural-coordinate support of the target law.
    Interval target_support{0.0, 0.0};
};

[[nodiscard]] StateGrid make_state_grid(const DiffusionSpec& diff, const Measure& nu,
                                        const Measure& mu, const SolverConfig& cfg);

/// Tridiagonal operator rows, one per node; boundary rows are zero and
/// their values are pinned to psi.
struct DiscreteProblem {
    SolverConfig config;
    StateGrid grid;
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;
    std::vector<double> psi;
    std::vector<double> initial;
    std::string diffusion;
};

struct ObstacleSolution {
    SolverConfig config;
    StateGrid grid;
    std::vector<double> t;
    /// v(x_i, t_j) in state coordinates.
    GridFunction v;
    std::vector<double> psi;
    /// Per-node worst complementarity residual over all time steps (relative).
    std::vector<double> residual;
    double max_residual = 0.0;
    std::size_t total_sweeps = 0;
    std::size_t max_sweeps = 0;

    [[nodiscard]] std::vector<double> natural_x() const;
};

/// Weighted linear-element discretisation of the variational inequality.
[[nodiscard]] DiscreteProblem assemble(const DiffusionSpec& diff, const Measure& nu, const Measure& mu,
                                       const SolverConfig& cfg);

/// Time-marches the projected scheme, solving each complementarity problem
/// by projected SOR.
[[nodiscard]] ObstacleSolution solve(const DiscreteProblem& problem);

/// Dynamic-programming value sup_tau E[U_mu(X_tau) 1{tau<t} + U_nu(X_tau) 1{tau=t}]
/// on the same grid as assemble, via an explicit trinomial tree.
[[nodiscard]] GridFunction optimal_stopping_oracle(const DiffusionSpec& diff, const Measure& nu,
                                                   const Measure& mu, const SolverConfig& cfg);

}  // namespace rootbarrier
