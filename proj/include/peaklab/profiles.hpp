#pragma once

#include <limits>

#include "peaklab/common.hpp"

namespace peaklab {

// Initial profiles with exact pointwise evaluation, antiderivatives and cell
// averages, so schemes can consume them without sampling error. Bump is the
// indicator-type plateau height * 1[|x - center| <= half_width].
struct Profile {
    enum class Kind { Zero, Flat, Bump, ExpDecay };
    Kind kind = Kind::Zero;
    double level = 0.0;                       // Flat
    double height = 0.0;                      // Bump, ExpDecay
    double center = 0.0, half_width = 0.0;    // Bump
    double rho = 1.0;                         // ExpDecay: height * exp(-rho |x|)

    static Profile zero();
    static Profile flat(double level);
    static Profile bump(double center, double half_width, double height);
    static Profile exp_decay(double height, double rho);

    double operator()(double x) const;
    double integral(double a, double b) const; // exact, a <= b
    double cell_average(double xc, double dx) const;
    double support_radius() const; // inf for Flat/ExpDecay, 0 for Zero
    bool is_zero() const { return kind == Kind::Zero || ((kind == Kind::Flat) && level == 0.0); }
    double sup_abs() const;
    void validate() const;
};

struct InitialData {
    Profile u0;
    Profile v0 = Profile::zero(); // wave velocity profile; ignored for heat
};

} // namespace peaklab
