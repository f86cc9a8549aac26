#include "peaklab/profiles.hpp"

#include <cmath>

namespace peaklab {

Profile Profile::zero() { return Profile{}; }

Profile Profile::flat(double level) {
    Profile p;
    p.kind = Kind::Flat;
    p.level = level;
    p.validate();
    return p;
}

Profile Profile::bump(double center, double half_width, double height) {
    Profile p;
    p.kind = Kind::Bump;
    p.center = center;
    p.half_width = half_width;
    p.height = height;
    p.validate();
    return p;
}

Profile Profile::exp_decay(double height, double rho) {
    Profile p;
    p.kind = Kind::ExpDecay;
    p.height = height;
    p.rho = rho;
    p.validate();
    return p;
}

void Profile::validate() const {
    switch (kind) {
    case Kind::Zero:
        break;
    case Kind::Flat:
        if (!std::isfinite(level) || level < 0.0)
            throw ConfigError("initial profile: flat level must be finite and >= 0");
        break;
    case Kind::Bump:
        if (!std::isfinite(height) || height < 0.0)
            throw ConfigError("initial profile: bump height must be finite and >= 0");
        if (!std::isfinite(center)) throw ConfigError("initial profile: bump center must be finite");
        if (!(half_width > 0.0) || !std::isfinite(half_width))
            throw ConfigError("initial profile: bump half_width must be positive");
        break;
    case Kind::ExpDecay:
        if (!std::isfinite(height) || height < 0.0)
            throw ConfigError("initial profile: exp_decay height must be finite and >= 0");
        if (!(rho > 0.0) || !std::isfinite(rho))
            throw ConfigError("initial profile: exp_decay rho must be positive");
        break;
    }
}

double Profile::operator()(double x) const {
    switch (kind) {
    case Kind::Zero:
        return 0.0;
    case Kind::Flat:
        return level;
    case Kind::Bump:
        return std::abs(x - center) <= half_width ? height : 0.0;
    case Kind::ExpDecay:
        return height * std::exp(-rho * std::abs(x));
    }
    return 0.0;
}

double Profile::integral(double a, double b) const {
    if (!(b >= a)) throw ConfigError("profile integral: need a <= b");
    switch (kind) {
    case Kind::Zero:
        return 0.0;
    case Kind::Flat:
        return level * (b - a);
    case Kind::Bump: {
        const double lo = std::max(a, center - half_width);
        const double hi = std::min(b, center + half_width);
        return hi > lo ? height * (hi - lo) : 0.0;
    }
    case Kind::ExpDecay: {
        // F(x) = integral_{-inf}^x of the profile, split at the kink.
        auto F = [&](double x) {
            return x <= 0.0 ? height * std::exp(rho * x) / rho
                            : height * (2.0 - std::exp(-rho * x)) / rho;
        };
        return F(b) - F(a);
    }
    }
    return 0.0;
}

double Profile::cell_average(double xc, double dx) const {
    return integral(xc - 0.5 * dx, xc + 0.5 * dx) / dx;
}

double Profile::support_radius() const {
    switch (kind) {
    case Kind::Zero:
        return 0.0;
    case Kind::Flat:
        return level == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    case Kind::Bump:
        return height == 0.0 ? 0.0 : std::abs(center) + half_width;
    case Kind::ExpDecay:
        return height == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

double Profile::sup_abs() const {
    switch (kind) {
    case Kind::Zero:
        return 0.0;
    case Kind::Flat:
        return std::abs(level);
    case Kind::Bump:
        return std::abs(height);
    case Kind::ExpDecay:
        return std::abs(height);
    }
    return 0.0;
}

} // namespace peaklab
