#pragma once

#include <span>
#include <string>
#include <vector>

#include "peaklab/common.hpp"
#include "peaklab/simulate.hpp"

namespace peaklab {

enum class FieldSource { MonteCarlo, Oracle };

// Pointwise nu-th absolute moment on the grid. Stored values carry an optional
// log-scale offset: true value = values[...] * exp(log_offset). The offset is 0
// except when the deterministic solver had to rescale to dodge overflow; all
// estimators fold it back in log space.
struct MomentField {
    int nu = 2;
    std::vector<double> times;
    std::vector<double> xs;
    std::vector<double> values; // t-major, times.size() * xs.size()
    std::vector<double> ses;    // same shape; all zero for oracle fields
    long n_paths = 0;
    FieldSource source = FieldSource::Oracle;
    double log_offset = 0.0;

    std::size_t idx(std::size_t it, std::size_t ix) const { return it * xs.size() + ix; }
    double value(std::size_t it, std::size_t ix) const { return values[idx(it, ix)]; }
    double se(std::size_t it, std::size_t ix) const { return ses[idx(it, ix)]; }
    void validate() const;
};

// Mean of |u|^nu over a path ensemble. Standard errors by batch means with
// min(32, n_paths) contiguous index batches; the batch partition is what keeps
// the reduction deterministic under any worker count. All paths must share the
// same config hash and match the grid.
MomentField moment_field(const GridSpec& grid, std::span<const PathField> paths, int nu);

// Streaming version: generates the ensemble on the fly (one batch per task,
// accumulated in path order) and never materialises all paths. Several nu can
// share one pass over the noise.
std::vector<MomentField> moment_fields_mc(const SimConfig& config, const std::vector<int>& nus,
                                          int workers);
MomentField moment_field_mc(const SimConfig& config, int nu, int workers);

struct SlopeFit {
    double slope = 0.0;
    double se = 0.0;
    int n_points = 0;
};

// Least-squares slope of t -> ln sup_x field(t, x) over the trailing window
// (fraction of [0, T], default one half). Needs >= 4 points and positive sups.
SlopeFit lyapunov_estimate(const MomentField& field, double window = 0.5);

enum class RegionTrend { Grow, Decay, DeadBand, Unavailable };
std::string trend_label(RegionTrend t);

struct GrowthIndexReport {
    std::vector<double> alphas;
    std::vector<double> slopes;    // slope of ln sup_{|x| >= alpha t}; -inf if the sup vanishes
    std::vector<double> slope_ses;
    std::vector<RegionTrend> trends;
    double lambda_lower_hat = 0.0; // largest alpha still growing; 0 if none
    double lambda_upper_hat = 0.0; // smallest alpha decaying; +inf if none
    double gamma_bar_hat = 0.0;    // Lyapunov slope of the full sup
    double window = 0.5;
    double delta = 0.02;
};

// Classify each front speed alpha by the slope of ln sup over |x| >= alpha t
// in the trailing window, with a +-delta dead band. A sup that is exactly zero
// anywhere in the window is decisive decay (compact-support wave fields vanish
// outside the light cone). Regions empty on the grid are unavailable.
GrowthIndexReport growth_index_estimate(const MomentField& field, const std::vector<double>& alphas,
                                        double window = 0.5, double delta = 0.02);

// Exponentially discounted weighted sup norm:
// sup_{t, x} [ exp(-beta t) * exp(c x) * field^{2/nu} ]^{1/2}.
double discounted_sup_norm(const MomentField& field, double beta, double c);

// Discounted mass of the second moment outside the cone |x| < alpha t:
// integral_0^T exp(-beta t) integral_{|x| >= alpha t} field dx dt. nu must be 2.
double cone_exterior_l2(const MomentField& field, double alpha, double beta);

} // namespace peaklab
