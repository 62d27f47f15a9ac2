#pragma once

#include <functional>
#include <string>

#include "rootbarrier/measures.hpp"

namespace rootbarrier {

struct SigmaBounds {
    double lower;
    double upper;
    double lipschitz;
    /// Smallest K with 1/K < sigma < K and Lipschitz constant <= K.
    [[nodiscard]] double K() const;
};

/// Coefficient of the weighted bilinear form in the state variable.
struct FormCoefficients {
    double a;  // diffusion part
    double b;  // first-order part, including the weight term
};

/// dX = sigma(X) dW, or the geometric case sigma(x) = x solved in y = ln x.
class DiffusionSpec {
public:
    static DiffusionSpec brownian(double scale = 1.0);
    static DiffusionSpec geometric();
    /// sigma(x) = s0 + s1 * tanh(x); positive when s0 > |s1|.
    static DiffusionSpec tanh_local(double s0, double s1);
    static DiffusionSpec local(std::function<double(double)> sigma,
                               std::function<double(double)> dsigma, std::string name);

    [[nodiscard]] bool is_geometric() const noexcept { return geometric_; }
    /// True when sigma is constant in the state variable.
    [[nodiscard]] bool has_constant_state_vol() const noexcept { return geometric_ || constant_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

    /// sigma and sigma' in natural coordinates.
    [[nodiscard]] double sigma(double x) const { return sigma_(x); }
    [[nodiscard]] double dsigma(double x) const { return dsigma_(x); }

    /// Generator in the state variable: L v = diff(y) v'' + drift(y) v'.
    [[nodiscard]] double state_diffusion(double y) const;
    [[nodiscard]] double state_drift(double y) const;
    /// Volatility of the state variable (1 in the geometric case).
    [[nodiscard]] double state_sigma(double y) const;

    /// Weighted-form coefficients a, b at state y for weight exp(-2 lambda |y|).
    [[nodiscard]] FormCoefficients coefficients(double y, double lambda) const;

    [[nodiscard]] double to_state(double natural) const;
    [[nodiscard]] double to_natural(double state) const;

    /// Sampled bounds on a natural-coordinate interval.
    [[nodiscard]] SigmaBounds bounds_on(Interval natural) const;

private:
    DiffusionSpec() = default;
    std::function<double(double)> sigma_;
    std::function<double(double)> dsigma_;
    std::string name_;
    bool geometric_ = false;
    bool constant_ = false;
};

}  // namespace rootbarrier
