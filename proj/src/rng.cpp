#include "peaklab/rng.hpp"

#include <cmath>

namespace peaklab {

namespace {

// Philox4x32 round constants (key Weyl increments and lane multipliers).
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
constexpr std::uint32_t kMult0 = 0xD2511F53u;
constexpr std::uint32_t kMult1 = 0xCD9E8D57u;

inline void philox_round(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

// Top 53 bits of a u64, shifted into (0, 1]; never returns 0 so log() is safe.
inline double u64_to_unit(std::uint64_t v) {
    return (static_cast<double>(v >> 11) + 1.0) * 0x1p-53;
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        philox_round(counter, key);
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return counter;
}

double standard_normal(std::uint64_t seed, std::uint64_t path,
                       std::uint32_t t_index, std::uint32_t x_index) {
    const std::array<std::uint32_t, 4> ctr = {
        t_index,
        x_index,
        static_cast<std::uint32_t>(path),
        static_cast<std::uint32_t>(path >> 32),
    };
    const std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(seed),
        static_cast<std::uint32_t>(seed >> 32),
    };
    const auto r = philox4x32(ctr, key);
    const std::uint64_t a = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
    const double u1 = u64_to_unit(a);
    const double u2 = u64_to_unit(b);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double noise_increment(const GridSpec& grid, std::uint64_t seed, std::uint64_t path,
                       std::uint32_t t_index, std::uint32_t x_index) {
    return standard_normal(seed, path, t_index, x_index) * std::sqrt(grid.dt * grid.dx);
}

} // namespace peaklab
