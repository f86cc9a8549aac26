#pragma once

#include <array>
#include <cstdint>

#include "peaklab/common.hpp"

namespace peaklab {

// Philox4x32-10 counter-based generator (Salmon et al. constants). A block is a
// pure function of (counter, key), so every grid cell's noise can be regenerated
// independently of execution order; that is what makes multi-worker reductions
// bit-identical.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// One N(0,1) variate per (seed, path, t_index, x_index) cell, via Box-Muller on
// the four 32-bit lanes of a single Philox block.
double standard_normal(std::uint64_t seed, std::uint64_t path,
                       std::uint32_t t_index, std::uint32_t x_index);

// Cell increment of space-time white noise: N(0,1) * sqrt(dt*dx).
double noise_increment(const GridSpec& grid, std::uint64_t seed, std::uint64_t path,
                       std::uint32_t t_index, std::uint32_t x_index);

} // namespace peaklab
