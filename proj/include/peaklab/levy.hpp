#pragma once

#include <vector>

#include "peaklab/common.hpp"

namespace peaklab {

// Symmetric Levy generators we support: Brownian motion scaled so the generator
// is (kappa/2) d^2/dx^2, and the symmetric alpha-stable process with jumps
// truncated to (-1, 1), alpha in (1, 2). Both have characteristic exponent
// Psi >= 0 with E exp(i xi X_t) = exp(-t Psi(xi)).
enum class LevyKind { Brownian, TruncatedStable };

struct QuadratureSpec {
    double xi_max = 2.0e5;  // frequency cutoff for the resolvent integral
    double rel_tol = 1e-10; // target relative tolerance of adaptive quadrature
    int max_depth = 18;     // Gauss-Kronrod adaptive subdivision depth
};

struct LevyModel {
    LevyKind kind = LevyKind::Brownian;
    double kappa = 1.0; // Brownian diffusivity
    double alpha = 1.5; // truncated-stable index
    QuadratureSpec quad;

    static LevyModel brownian(double kappa);
    static LevyModel truncated_stable(double alpha, QuadratureSpec quad = {});
    void validate() const;
};

// Characteristic exponent. Brownian: kappa*xi^2/2. Truncated stable:
// 2 * integral_0^1 (1 - cos(xi z)) z^{-1-alpha} dz, evaluated by compensated
// quadrature near 0 plus an asymptotic expansion for large |xi|.
double psi(const LevyModel& model, double xi);

// Resolvent ("Dalang") integral (1/2pi) * integral d(xi) / (beta + 2 Psi(xi)),
// always computed by quadrature, never by closed form. beta > 0.
double upsilon(const LevyModel& model, double beta);

// Inverse of upsilon on (0, inf): bracketing + bisection until
// |upsilon(beta) - y| <= 1e-10 * y.
double upsilon_inverse(const LevyModel& model, double y);

// Log exponential moment M(c) = ln E exp(c X_1). Brownian: kappa c^2/2.
// Truncated stable: 2 * integral_0^1 (cosh(cz) - 1) z^{-1-alpha} dz.
double mgf_log(const LevyModel& model, double c);

// Legendre transform Lambda(a) = sup_c (a c - M(c)), a >= 0. The maximiser is
// bracketed by geometric growth and refined by golden-section search.
double legendre(const LevyModel& model, double a);

struct DensityResult {
    std::vector<double> values; // density at the requested nodes, clamped >= 0
    double clamped_mass = 0.0;  // integral of the negative ringing that was clamped
};

// Transition density p_t on a uniform grid by direct Fourier inversion
// p_t(x) = (1/pi) * integral_0^Xi cos(xi x) exp(-t Psi(xi)) d(xi), with Xi set
// by t*Psi(Xi) >= 46 and the frequency step tied to the grid span so alias
// images fall beyond it. Throws if visible mass sits at the grid edge.
DensityResult transition_density(const LevyModel& model, double t, const std::vector<double>& xs);

// Single-point inversion (adaptive quadrature); used for kernel evaluation.
double transition_density_at(const LevyModel& model, double t, double x);

} // namespace peaklab
