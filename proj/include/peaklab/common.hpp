#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace peaklab {

inline constexpr double kPi = 3.14159265358979323846;

// Error taxonomy mirrors the CLI exit codes: config -> 2, numerics -> 3, I/O -> 4.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Space-time grid. Space is the symmetric window [-L, L] with nodes at
// x_i = (i - n_half)*dx, time is t_k = k*dt up to T. T/dt and L/dx must be
// integral so that probe times and the wave light cone land on grid nodes.
struct GridSpec {
    double dt = 0.0;
    double dx = 0.0;
    double T = 0.0;
    double L = 0.0;

    int n_steps() const { return static_cast<int>(std::llround(T / dt)); }
    int n_half() const { return static_cast<int>(std::llround(L / dx)); }
    int n_x() const { return 2 * n_half() + 1; }
    double t(int k) const { return k * dt; }
    double x(int i) const { return (i - n_half()) * dx; }

    void validate() const;
};

// Upper tail of the standard normal, Phi_bar(z) = P(Z > z).
inline double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// FNV-1a 64-bit; used for config hashes and output-file digests.
inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}
inline std::uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

// Shortest decimal string that round-trips a double (17 significant digits).
std::string format_g17(double v);

std::string hex64(std::uint64_t v);

} // namespace peaklab
