#pragma once

#include <cstdint>
#include <vector>

#include "peaklab/bounds.hpp"
#include "peaklab/kernels.hpp"
#include "peaklab/profiles.hpp"

namespace peaklab {

enum class Scheme { HeatMildSpectral, HeatFiniteDifference, WaveConeMild };

struct SimConfig {
    KernelSpec equation;
    SigmaSpec sigma;
    InitialData initial;
    GridSpec grid;
    long n_paths = 0;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::HeatMildSpectral;

    void validate() const;
    // FNV digest of the canonical serialisation (implemented with the config codec).
    std::uint64_t config_hash() const;
};

// One realisation of the field on the full grid, (n_steps+1) x n_x, t-major.
struct PathField {
    std::vector<double> values;
    int n_t = 0; // rows = n_t + 1
    int n_x = 0;
    long path_index = 0;
    std::uint64_t config_hash = 0;

    double at(int it, int ix) const { return values[static_cast<std::size_t>(it) * n_x + ix]; }
    double& at(int it, int ix) { return values[static_cast<std::size_t>(it) * n_x + ix]; }
};

// Mild / exponential-Euler step u_{k+1} = P_dt u_k + sigma(u_k) dW / dx, with
// P_dt a discrete convolution against the transition-density cell masses
// (HeatMildSpectral) or the explicit three-point Laplacian step
// (HeatFiniteDifference, requires kappa dt / dx^2 <= 0.5).
PathField simulate_heat_path(const SimConfig& config, long path_index);

// Wave cone scheme on dx = kappa dt: exact d'Alembert deterministic part plus
// (1/2) * cone sum of sigma(u) dW, updated incrementally in O(1) per cell.
PathField simulate_wave_path(const SimConfig& config, long path_index);

PathField simulate_path(const SimConfig& config, long path_index);

// Picard iteration of the discrete mild equation on the same noise realisation
// as simulate_heat_path. diff_norms[m] = weighted sup distance between iterates
// m and m+1 (weight exp(-beta t), beta from the second-moment threshold).
// Intended for small grids: each iterate costs O(n_t^2 * n_x * kernel width).
struct PicardResult {
    PathField field;
    std::vector<double> diff_norms;
};
PicardResult picard_solve(const SimConfig& config, long path_index, int n_iter);

} // namespace peaklab
