#include "rootbarrier/grid.hpp"

#include <algorithm>
#include <cmath>

namespace rootbarrier {

std::size_t bracket(std::span<const double> grid, double x) {
    if (grid.size() < 2) return 0;
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    std::size_t k = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
    return std::min(k, grid.size() - 2);
}

double GridFunction::interpolate(double x, double t) const {
    x = std::clamp(x, x_.front(), x_.back());
    t = std::clamp(t, t_.front(), t_.back());
    const std::size_t i = bracket(x_, x);
    const std::size_t j = bracket(t_, t);
    const double wx = x_.size() > 1 ? (x - x_[i]) / (x_[i + 1] - x_[i]) : 0.0;
    const double wt = t_.size() > 1 ? (t - t_[j]) / (t_[j + 1] - t_[j]) : 0.0;
    const std::size_t i1 = std::min(i + 1, x_.size() - 1), j1 = std::min(j + 1, t_.size() - 1);
    const double a = (1 - wx) * (*this)(i, j) + wx * (*this)(i1, j);
    const double b = (1 - wx) * (*this)(i, j1) + wx * (*this)(i1, j1);
    return (1 - wt) * a + wt * b;
}

GridLocator::GridLocator(std::span<const double> grid) : grid_(grid.begin(), grid.end()) {
    const std::size_t n = grid_.size();
    if (n < 2) return;
    // Buckets no wider than the smallest cell hold at most one node each.
    double min_gap = grid_.back() - grid_.front();
    for (std::size_t k = 0; k + 1 < n; ++k) min_gap = std::min(min_gap, grid_[k + 1] - grid_[k]);
    const auto buckets = static_cast<std::size_t>(std::ceil((grid_.back() - grid_.front()) / min_gap)) + 1;
    origin_ = grid_.front();
    inv_width_ = static_cast<double>(buckets) / (grid_.back() - grid_.front());
    start_.resize(buckets + 1);
    std::size_t k = 0;
    for (std::size_t b = 0; b <= buckets; ++b) {
        const double left = origin_ + static_cast<double>(b) / inv_width_;
        while (k + 1 < n && grid_[k + 1] <= left) ++k;
        start_[b] = k;
    }
}

long GridLocator::locate(double x) const {
    const std::size_t n = grid_.size();
    if (n == 0 || x < grid_.front()) return -1;
    if (x >= grid_.back()) return static_cast<long>(n) - 1;
    const auto b = std::min(static_cast<std::size_t>((x - origin_) * inv_width_), start_.size() - 1);
    std::size_t k = start_[b];
    k += static_cast<std::size_t>(grid_[k + 1] <= x);
    return static_cast<long>(k);
}

}  // namespace rootbarrier
