#pragma once

#include <algorithm>

namespace rootbarrier {

/// Brownian motion from 0 stopped at R(x) = -lambda (x + alpha)(x - beta) on
/// (-alpha, beta), R = 0 outside, with F(t) = t^2 / 2. Closed forms for the
/// hedging functions (base point 0).
struct ParabolaCase {
    double alpha = 2.0;
    double beta = 3.0;
    double lambda = 0.5;

    [[nodiscard]] double R(double x) const {
        return (x > -alpha && x < beta) ? -lambda * (x + alpha) * (x - beta) : 0.0;
    }
    [[nodiscard]] double c() const { return lambda / (1.0 + lambda); }

    [[nodiscard]] double M(double x, double t) const {
        return t < R(x) ? c() * (t - (x + alpha) * (x - beta)) : t;
    }

    [[nodiscard]] double Z(double x) const {
        const double k = lambda / (6.0 * (1.0 + lambda));
        const double a = alpha, b = beta;
        if (x >= b) return k * (-b * b * b * b - 2 * a * b * b * b + (2 * b * b * b + 6 * a * b * b) * x);
        if (x <= -a) return k * (-a * a * a * a - 2 * a * a * a * b - (2 * a * a * a + 6 * a * a * b) * x);
        return k * (-x * x * x * x - 2 * (a - b) * x * x * x + 6 * a * b * x * x);
    }

    [[nodiscard]] double G(double x, double t) const {
        const double r = R(x);
        if (t < r) return c() * (t * t / 2 - t * (x + alpha) * (x - beta)) - Z(x);
        return r * r / (2 * (1 + lambda)) + t * t / 2 - Z(x);
    }

    [[nodiscard]] double H(double x) const {
        const double r = R(x);
        return -r * r / (2 * (1 + lambda)) + Z(x);
    }

    /// G + H - F.
    [[nodiscard]] double gap(double x, double t) const {
        const double d = std::max(R(x) - t, 0.0);
        return -d * d / (2 * (1 + lambda));
    }
};

}  // namespace rootbarrier
