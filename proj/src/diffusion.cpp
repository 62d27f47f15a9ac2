#include "rootbarrier/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rootbarrier/errors.hpp"

namespace rootbarrier {

namespace {
double sgn(double x) { return (x > 0.0) - (x < 0.0); }
}  // namespace

double SigmaBounds::K() const { return std::max({upper, 1.0 / lower, lipschitz}); }

DiffusionSpec DiffusionSpec::brownian(double scale) {
    if (!(scale > 0.0)) throw InputError("Brownian scale must be positive");
    DiffusionSpec d;
    d.sigma_ = [scale](double) { return scale; };
    d.dsigma_ = [](double) { return 0.0; };
    d.name_ = scale == 1.0 ? "bm" : "constant:" + std::to_string(scale);
    d.constant_ = true;
    return d;
}

DiffusionSpec DiffusionSpec::geometric() {
    DiffusionSpec d;
    d.sigma_ = [](double x) { return x; };
    d.dsigma_ = [](double) { return 1.0; };
    d.name_ = "geometric";
    d.geometric_ = true;
    return d;
}

DiffusionSpec DiffusionSpec::tanh_local(double s0, double s1) {
    if (!(s0 > std::abs(s1))) throw InputError("tanh volatility must stay positive");
    DiffusionSpec d;
    d.sigma_ = [s0, s1](double x) { return s0 + s1 * std::tanh(x); };
    d.dsigma_ = [s1](double x) {
        const double t = std::tanh(x);
        return s1 * (1.0 - t * t);
    };
    d.name_ = "tanh:" + std::to_string(s0) + "," + std::to_string(s1);
    d.constant_ = s1 == 0.0;
    return d;
}

DiffusionSpec DiffusionSpec::local(std::function<double(double)> sigma,
                                   std::function<double(double)> dsigma, std::string name) {
    DiffusionSpec d;
    d.sigma_ = std::move(sigma);
    d.dsigma_ = std::move(dsigma);
    d.name_ = std::move(name);
    return d;
}

double DiffusionSpec::state_diffusion(double y) const {
    if (geometric_) return 0.5;
    const double s = sigma_(y);
    return 0.5 * s * s;
}

double DiffusionSpec::state_drift(double) const { return geometric_ ? -0.5 : 0.0; }

double DiffusionSpec::state_sigma(double y) const { return geometric_ ? 1.0 : sigma_(y); }

FormCoefficients DiffusionSpec::coefficients(double y, double lambda) const {
    if (geometric_) return {0.5, 0.5 - lambda * sgn(y)};
    const double s = sigma_(y);
    return {0.5 * s * s, s * dsigma_(y) - lambda * s * s * sgn(y)};
}

double DiffusionSpec::to_state(double natural) const {
    if (!geometric_) return natural;
    if (!(natural > 0.0)) throw InputError("geometric state needs positive values");
    return std::log(natural);
}

double DiffusionSpec::to_natural(double state) const { return geometric_ ? std::exp(state) : state; }

SigmaBounds DiffusionSpec::bounds_on(Interval natural) const {
    const int n = 2000;
    SigmaBounds b{std::numeric_limits<double>::infinity(), 0.0, 0.0};
    for (int i = 0; i <= n; ++i) {
        const double x = natural.lo + (natural.hi - natural.lo) * i / n;
        const double s = sigma_(x);
        b.lower = std::min(b.lower, s);
        b.upper = std::max(b.upper, s);
        b.lipschitz = std::max(b.lipschitz, std::abs(dsigma_(x)));
    }
    return b;
}

}  // namespace rootbarrier
