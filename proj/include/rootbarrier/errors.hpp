#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rootbarrier {

/// Bad user input: malformed files, invalid configs, non-embeddable pairs.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Quote data violating the static no-arbitrage shape conditions.
class MarketDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure inside a solver.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double worst_residual = 0.0, std::size_t node = 0)
        : std::runtime_error(what), worst_residual_(worst_residual), node_(node) {}

    [[nodiscard]] double worst_residual() const noexcept { return worst_residual_; }
    [[nodiscard]] std::size_t node() const noexcept { return node_; }

private:
    double worst_residual_;
    std::size_t node_;
};

}  // namespace rootbarrier
