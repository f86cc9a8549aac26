#include "peaklab/common.hpp"

#include <cstdio>

namespace peaklab {

void GridSpec::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("grid.dt must be a positive finite number");
    if (!(dx > 0.0) || !std::isfinite(dx)) throw ConfigError("grid.dx must be a positive finite number");
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("grid.T must be a positive finite number");
    if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("grid.L must be a positive finite number");
    const double steps = T / dt;
    if (std::abs(steps - std::llround(steps)) > 1e-9 * steps)
        throw ConfigError("grid.T must be an integer multiple of grid.dt");
    const double halves = L / dx;
    if (std::abs(halves - std::llround(halves)) > 1e-9 * halves)
        throw ConfigError("grid.L must be an integer multiple of grid.dx");
    if (n_steps() < 1) throw ConfigError("grid resolves to zero time steps");
    if (n_steps() > 2'000'000) throw ConfigError("grid.T/grid.dt is implausibly large");
    if (n_half() > 2'000'000) throw ConfigError("grid.L/grid.dx is implausibly large");
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace peaklab
