#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rootbarrier {

/// Values on a tensor grid, stored time-major: values[j * nx + i] = f(x_i, t_j).
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(std::vector<double> x, std::vector<double> t, double fill = 0.0)
        : x_(std::move(x)), t_(std::move(t)), values_(x_.size() * t_.size(), fill) {}

    [[nodiscard]] std::size_t nx() const noexcept { return x_.size(); }
    [[nodiscard]] std::size_t nt() const noexcept { return t_.size(); }
    [[nodiscard]] const std::vector<double>& x() const noexcept { return x_; }
    [[nodiscard]] const std::vector<double>& t() const noexcept { return t_; }

    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return values_[j * x_.size() + i]; }
    double& operator()(std::size_t i, std::size_t j) { return values_[j * x_.size() + i]; }

    [[nodiscard]] std::span<const double> row(std::size_t j) const {
        return {values_.data() + j * x_.size(), x_.size()};
    }
    [[nodiscard]] std::span<double> row(std::size_t j) { return {values_.data() + j * x_.size(), x_.size()}; }
    [[nodiscard]] const std::vector<double>& data() const noexcept { return values_; }

    /// Bilinear interpolation, clamped to the grid.
    [[nodiscard]] double interpolate(double x, double t) const;

private:
    std::vector<double> x_;
    std::vector<double> t_;
    std::vector<double> values_;
};

/// Index k with grid[k] <= x < grid[k+1], clamped to [0, n-2].
[[nodiscard]] std::size_t bracket(std::span<const double> grid, double x);

/// O(1) cell lookup on a sorted grid through a uniform bucket table.
class GridLocator {
public:
    GridLocator() = default;
    explicit GridLocator(std::span<const double> grid);

    /// Index of the last node <= x; -1 below the grid, n-1 at or above the top node.
    [[nodiscard]] long locate(double x) const;

private:
    std::vector<double> grid_;
    std::vector<std::size_t> start_;
    double origin_ = 0.0;
    double inv_width_ = 0.0;
};

}  // namespace rootbarrier
