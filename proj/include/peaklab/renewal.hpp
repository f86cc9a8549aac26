#pragma once

#include "peaklab/estimate.hpp"
#include "peaklab/kernels.hpp"
#include "peaklab/profiles.hpp"

namespace peaklab {

// Deterministic second-moment problem: for sigma(u) = lambda * u the pointwise
// second moment f_t(x) = E u_t(x)^2 solves the Volterra renewal equation
//   f = g + lambda^2 * (k^2 (*) f),   g = (deterministic part)^2,
// exactly; the solver below is the reference ("oracle") the Monte Carlo side is
// validated against.
struct RenewalProblem {
    KernelSpec equation;
    double lambda = 1.0;
    InitialData initial;
    GridSpec grid;

    void validate() const;
};

// Squared deterministic part g on the grid. Heat: (P_t u0)^2 with the semigroup
// applied in closed form (Brownian) or by density-row marching (truncated
// stable). Wave: the exact d'Alembert solution squared.
struct ForcingField {
    std::vector<double> times;
    std::vector<double> xs;
    std::vector<double> values; // t-major
    double at(std::size_t it, std::size_t ix) const { return values[it * xs.size() + ix]; }
};
ForcingField forcing_field(const RenewalProblem& problem);

// March the renewal equation with FFT convolutions in space and exact handling
// of the kernel-lag endpoint: the heat weight over a lag cell uses the exact
// integral of ||p_r||_{L^2}^2 (which absorbs the 1/sqrt(r) singularity) with the
// spatial shape at the midpoint lag; the wave weights are trapezoidal in time
// (the squared cone kernel vanishes at lag 0) with exact cone cell masses on
// dx = kappa dt. Rescales into log space on overflow.
MomentField solve_second_moment(const RenewalProblem& problem);

// Trailing-window growth rate of ln sup_x f; thin wrapper over the estimator.
double growth_rate(const MomentField& field, double window = 0.5);

} // namespace peaklab
