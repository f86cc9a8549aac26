#pragma once

#include "peaklab/common.hpp"
#include "peaklab/levy.hpp"

namespace peaklab {

enum class Equation { Heat, Wave };

// Fundamental-solution kernel of the mild formulation. Heat: the transition
// density p_t of the Levy model. Wave (speed kappa): the half-indicator
// Gamma_t(x) = (1/2) 1[|x| <= kappa t].
struct KernelSpec {
    Equation equation = Equation::Heat;
    LevyModel model; // Heat: driving generator. Wave: model.kappa is the speed.

    double kappa() const { return model.kappa; }
    static KernelSpec heat(const LevyModel& m);
    static KernelSpec wave(double kappa);
    void validate() const;
};

double kernel_value(const KernelSpec& spec, double t, double x);

// Squared L^2 norm against the two-sided exponential weight exp(c x):
// integral k_t(x)^2 exp(c x) dx. Can overflow double for large c*t, so the
// log-scale value is always reported alongside.
struct NormSq {
    double value = 0.0;     // exp(log_value); may be inf
    double log_value = 0.0; // always finite for t > 0
};
NormSq weighted_l2_norm_sq(const KernelSpec& spec, double t, double c);

// Laplace transform (in time) of the squared-kernel mass beyond the moving
// front: integral_0^inf exp(-beta t) * integral_{z >= alpha_speed * t} k_t(z)^2 dz dt.
// Wave: closed form (kappa - alpha)^+ / (4 beta^2). Heat: time quadrature with
// the substitution t = s^2 to neutralise the 1/sqrt(t) endpoint.
double tail_mass_laplace(const KernelSpec& spec, double alpha_speed, double beta);

} // namespace peaklab
