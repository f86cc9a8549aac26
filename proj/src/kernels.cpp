#include "peaklab/kernels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

namespace peaklab {

KernelSpec KernelSpec::heat(const LevyModel& m) {
    KernelSpec s;
    s.equation = Equation::Heat;
    s.model = m;
    s.validate();
    return s;
}

KernelSpec KernelSpec::wave(double kappa) {
    KernelSpec s;
    s.equation = Equation::Wave;
    s.model = LevyModel::brownian(kappa); // carrier for the speed parameter
    s.validate();
    return s;
}

void KernelSpec::validate() const {
    model.validate();
    if (equation == Equation::Wave && model.kind != LevyKind::Brownian)
        throw ConfigError("wave equation takes a plain speed kappa, not a jump generator");
}

double kernel_value(const KernelSpec& spec, double t, double x) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("kernel_value: t must be positive");
    if (spec.equation == Equation::Wave) return std::abs(x) <= spec.kappa() * t ? 0.5 : 0.0;
    if (spec.model.kind == LevyKind::Brownian) {
        const double s = spec.model.kappa * t;
        return std::exp(-x * x / (2.0 * s)) / std::sqrt(2.0 * kPi * s);
    }
    return transition_density_at(spec.model, t, x);
}

NormSq weighted_l2_norm_sq(const KernelSpec& spec, double t, double c) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("weighted_l2_norm_sq: t must be positive");
    if (!std::isfinite(c)) throw ConfigError("weighted_l2_norm_sq: c must be finite");
    NormSq out;
    if (spec.equation == Equation::Wave) {
        // integral (1/4) 1[|x| <= kappa t] e^{cx} dx = sinh(c kappa t) / (2c).
        const double y = std::abs(c) * spec.kappa() * t;
        if (y < 1e-6) {
            out.value = 0.5 * spec.kappa() * t * (1.0 + y * y / 6.0);
            out.log_value = std::log(out.value);
        } else if (y > 30.0) {
            out.log_value = y - std::log(4.0 * std::abs(c)) + std::log1p(-std::exp(-2.0 * y));
            out.value = std::exp(out.log_value);
        } else {
            out.value = std::sinh(y) / (2.0 * std::abs(c));
            out.log_value = std::log(out.value);
        }
        return out;
    }
    if (spec.model.kind == LevyKind::Brownian) {
        // integral p_t(x)^2 e^{cx} dx = exp(kappa c^2 t / 4) / (2 sqrt(pi kappa t)).
        const double kappa = spec.model.kappa;
        out.log_value = 0.25 * kappa * c * c * t - 0.5 * std::log(4.0 * kPi * kappa * t);
        out.value = std::exp(out.log_value);
        return out;
    }
    if (c != 0.0)
        throw ConfigError("weighted_l2_norm_sq: c != 0 needs a closed-form kernel "
                          "(Brownian heat or wave); use c = 0 for the truncated-stable generator");
    // Plancherel: ||p_t||^2 = (1/pi) integral_0^Xi exp(-2 t Psi) d(xi).
    const LevyModel& m = spec.model;
    double Xi = std::pow(46.0 / (4.0 * t), 1.0 / m.alpha) + 1.0;
    while (2.0 * t * psi(m, Xi) < 46.0) Xi *= 1.25;
    auto f = [&](double xi) { return std::exp(-2.0 * t * psi(m, xi)); };
    double err = 0.0;
    out.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
                    f, 0.0, Xi, m.quad.max_depth, m.quad.rel_tol, &err) /
                kPi;
    if (!std::isfinite(out.value) || out.value <= 0.0)
        throw NumericalError("weighted_l2_norm_sq: quadrature failed");
    out.log_value = std::log(out.value);
    return out;
}

double tail_mass_laplace(const KernelSpec& spec, double alpha_speed, double beta) {
    if (!(alpha_speed >= 0.0) || !std::isfinite(alpha_speed))
        throw ConfigError("tail_mass_laplace: alpha_speed must be >= 0 and finite");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("tail_mass_laplace: beta must be positive");
    if (spec.equation == Equation::Wave) {
        const double excess = spec.kappa() - alpha_speed;
        return excess > 0.0 ? excess / (4.0 * beta * beta) : 0.0;
    }
    if (spec.model.kind != LevyKind::Brownian)
        throw ConfigError("tail_mass_laplace: heat form is available for the Brownian generator only");
    // (1/sqrt(pi kappa)) integral_0^inf exp(-beta s^2) Phi-bar(alpha s sqrt(2/kappa)) ds,
    // after t = s^2 removes the 1/sqrt(t) endpoint.
    const double kappa = spec.model.kappa;
    auto f = [&](double s) {
        return std::exp(-beta * s * s) * normal_upper_tail(alpha_speed * s * std::sqrt(2.0 / kappa));
    };
    const double S = std::sqrt(48.0 / beta);
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, 0.0, S, spec.model.quad.max_depth, spec.model.quad.rel_tol, &err);
    if (!std::isfinite(v)) throw NumericalError("tail_mass_laplace: quadrature failed");
    return v / std::sqrt(kPi * kappa);
}

} // namespace peaklab
