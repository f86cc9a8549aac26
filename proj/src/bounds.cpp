#include "peaklab/bounds.hpp"

#include <cmath>

namespace peaklab {

double SigmaSpec::lip() const { return std::abs(lambda); }

double SigmaSpec::lower_slope() const { return form == Form::Linear ? std::abs(lambda) : 0.0; }

double SigmaSpec::operator()(double u) const {
    if (form == Form::Linear) return lambda * u;
    const double clipped = std::min(std::abs(u), cap);
    return lambda * std::copysign(clipped, u);
}

void SigmaSpec::validate() const {
    if (!std::isfinite(lambda)) throw ConfigError("sigma.lambda must be finite");
    if (form == Form::SaturatingLinear && (!(cap > 0.0) || !std::isfinite(cap)))
        throw ConfigError("sigma.cap must be positive and finite");
}

double burkholder_constant(int nu) {
    if (nu == 2) return 1.0;
    if (nu > 2 && nu % 2 == 0) return 2.0 * std::sqrt(static_cast<double>(nu));
    throw ConfigError("moment order nu must be even and >= 2");
}

double moment_threshold_general(const LevyModel& model, const SigmaSpec& sigma, int nu, double c) {
    model.validate();
    sigma.validate();
    const double z = burkholder_constant(nu);
    const double lip = sigma.lip();
    if (lip == 0.0) return mgf_log(model, c); // noiseless limit of the formula
    const double y = 1.0 / (4.0 * z * z * lip * lip); // (2 z lip)^{-2}
    return mgf_log(model, c) + 0.5 * upsilon_inverse(model, y);
}

double moment_threshold_heat(double kappa, double lip, double c) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be positive");
    if (!(lip >= 0.0) || !std::isfinite(lip)) throw ConfigError("lip must be >= 0 and finite");
    return 0.25 * kappa * c * c + std::pow(lip, 4) / (4.0 * kappa);
}

WaveThreshold moment_threshold_wave(double kappa, double lip, int nu, double c) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be positive");
    if (!(lip >= 0.0) || !std::isfinite(lip)) throw ConfigError("lip must be >= 0 and finite");
    const double z = burkholder_constant(nu);
    const double base = kappa * kappa * c * c;
    WaveThreshold out;
    out.unscaled = std::sqrt(base + 0.5 * z * z * lip * lip);
    out.kappa_scaled = std::sqrt(base + 0.5 * kappa * z * z * lip * lip);
    return out;
}

double lambda_upper_general(const LevyModel& model, const SigmaSpec& sigma, int nu) {
    model.validate();
    sigma.validate();
    const double lip = sigma.lip();
    if (lip == 0.0) return 0.0; // no noise, no moment front
    const double z = burkholder_constant(nu);
    const double target = 0.5 * upsilon_inverse(model, 1.0 / (4.0 * z * z * lip * lip));
    // Lambda is increasing from Lambda(0) = 0; find the crossing of `target`.
    double hi = 1.0;
    while (legendre(model, hi) <= target) {
        hi *= 2.0;
        if (hi > 1e12) throw NumericalError("lambda_upper_general: crossing not bracketed");
    }
    double lo = hi / 2.0;
    if (legendre(model, lo) > target) lo = 0.0;
    while (hi - lo > 1e-8 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        (legendre(model, mid) > target ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

HeatLambdaBounds lambda_bounds_heat(const SigmaSpec& sigma) {
    sigma.validate();
    HeatLambdaBounds out;
    if (sigma.lip() == 0.0) {
        out.lower = 0.0;
        out.upper = 0.0;
        return out;
    }
    out.upper = 0.5 * sigma.lip() * sigma.lip();
    const double l = sigma.lower_slope();
    if (l > 0.0) out.lower = l * l / (2.0 * kPi);
    return out;
}

double lambda_exact_wave(double kappa) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be positive");
    return kappa;
}

bool lower_condition(const KernelSpec& spec, const SigmaSpec& sigma, double alpha_speed, double beta) {
    spec.validate();
    sigma.validate();
    if (!(alpha_speed >= 0.0) || !std::isfinite(alpha_speed))
        throw ConfigError("lower_condition: alpha_speed must be >= 0 and finite");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("lower_condition: beta must be >= 0");
    const double l = sigma.lower_slope();
    if (l <= 0.0) return false;
    if (spec.equation == Equation::Wave) {
        const double ceiling = spec.kappa() - 4.0 * beta * beta / (l * l);
        return alpha_speed > 0.0 && alpha_speed < ceiling;
    }
    if (spec.model.kind != LevyKind::Brownian)
        throw ConfigError("lower_condition: heat form is available for the Brownian generator only");
    const double peak = l * l / (4.0 * kPi);
    const double radius_sq = peak * peak - spec.kappa() * beta;
    if (radius_sq <= 0.0) return false;
    const double off = alpha_speed - peak;
    return off * off < radius_sq;
}

} // namespace peaklab
