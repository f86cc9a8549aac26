#pragma once

#include <optional>

#include "peaklab/common.hpp"
#include "peaklab/kernels.hpp"
#include "peaklab/levy.hpp"

namespace peaklab {

// Multiplicative noise coefficient sigma with sigma(0) = 0. Linear: sigma(u) =
// lambda * u. SaturatingLinear: sigma(u) = lambda * sign(u) * min(|u|, cap),
// which keeps the Lipschitz constant but loses the global lower slope.
struct SigmaSpec {
    enum class Form { Linear, SaturatingLinear };
    Form form = Form::Linear;
    double lambda = 1.0;
    double cap = 1.0; // SaturatingLinear only

    double lip() const;         // global Lipschitz constant, |lambda|
    double lower_slope() const; // largest l with |sigma(u)| >= l|u|; 0 when saturating
    double operator()(double u) const;
    void validate() const;
};

// Moment-inequality constant z_nu for even moments: z_2 = 1 (Ito isometry needs
// no constant), z_nu = 2 sqrt(nu) for even nu > 2. Odd or nu < 2 rejected.
double burkholder_constant(int nu);

// Exponential-rate threshold beyond which the weighted nu-th moment norm of the
// heat-type equation is finite: M(c) + (1/2) * upsilon_inverse((2 z_nu Lip)^{-2}).
double moment_threshold_general(const LevyModel& model, const SigmaSpec& sigma, int nu, double c);

// Sharper heat threshold from the exact Gaussian weighted norm:
// kappa c^2/4 + Lip^4 / (4 kappa)   (second moment, Brownian generator).
double moment_threshold_heat(double kappa, double lip, double c);

// Wave threshold. The constant term circulates in two normalisations, with and
// without a factor kappa on the noise term; we report both (they coincide at
// kappa = 1). `kappa_scaled` is the one consistent with
// integral exp(-beta t) ||Gamma_t||^2_{exp(c x)} dt = kappa / (2 (beta^2 - kappa^2 c^2)).
struct WaveThreshold {
    double unscaled = 0.0;     // sqrt(kappa^2 c^2 + z_nu^2 Lip^2 / 2)
    double kappa_scaled = 0.0; // sqrt(kappa^2 c^2 + kappa z_nu^2 Lip^2 / 2)
};
WaveThreshold moment_threshold_wave(double kappa, double lip, int nu, double c);

// Smallest front speed a with Lambda(a) > (1/2) upsilon_inverse((2 z_nu Lip)^{-2});
// beyond it the nu-th moment sup over |x| >= a t decays. Bisection to 1e-8.
double lambda_upper_general(const LevyModel& model, const SigmaSpec& sigma, int nu);

// Two-sided interval for the second-moment front speed of the heat equation
// (Brownian generator, any kappa): [lower_slope^2 / (2 pi), Lip^2 / 2].
// The lower endpoint needs a genuine lower slope; saturating sigma leaves it
// unavailable. sigma == 0 degenerates to [0, 0].
struct HeatLambdaBounds {
    std::optional<double> lower;
    double upper = 0.0;
};
HeatLambdaBounds lambda_bounds_heat(const SigmaSpec& sigma);

// The wave front speed is exactly the wave speed.
double lambda_exact_wave(double kappa);

// Feasibility of the moment lower-bound construction at front speed alpha and
// rate beta. Heat (Brownian): (alpha - L^2/(4 pi))^2 < L^4/(16 pi^2) - kappa beta.
// Wave: 0 < alpha < kappa - 4 beta^2 / L^2. L is sigma's lower slope.
bool lower_condition(const KernelSpec& spec, const SigmaSpec& sigma, double alpha_speed, double beta);

} // namespace peaklab
