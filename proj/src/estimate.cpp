#include "peaklab/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace peaklab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double abs_pow(double u, int nu) {
    double a = std::abs(u), r = 1.0;
    for (int i = 0; i < nu; ++i) r *= a;
    return r;
}

int batch_count(long n_paths) { return static_cast<int>(std::min<long>(32, n_paths)); }

struct BatchStats {
    // Per cell: total sum over all paths, plus sum and sum-of-squares of the
    // batch means (for the batch-means standard error). The means are shifted
    // by the first batch's mean before accumulating; the variance is shift
    // invariant and this avoids the cancellation of the raw sum-of-squares
    // formula (a noiseless ensemble gets an exact zero instead of residue).
    std::vector<double> total, shift, m1, m2;
    bool first = true;
    explicit BatchStats(std::size_t cells) : total(cells, 0.0), shift(cells, 0.0), m1(cells, 0.0), m2(cells, 0.0) {}
    void fold(const std::vector<double>& batch_sum, long batch_paths) {
        const double inv = 1.0 / static_cast<double>(batch_paths);
        for (std::size_t c = 0; c < total.size(); ++c) {
            total[c] += batch_sum[c];
            const double m = batch_sum[c] * inv;
            if (first) shift[c] = m;
            const double d = m - shift[c];
            m1[c] += d;
            m2[c] += d * d;
        }
        first = false;
    }
    void finish(MomentField& out, long n_paths, int n_batches) const {
        const std::size_t cells = total.size();
        out.values.resize(cells);
        out.ses.assign(cells, 0.0);
        for (std::size_t c = 0; c < cells; ++c) out.values[c] = total[c] / static_cast<double>(n_paths);
        if (n_batches >= 2) {
            const double B = n_batches;
            for (std::size_t c = 0; c < cells; ++c) {
                const double var = (m2[c] - m1[c] * m1[c] / B) / (B - 1.0);
                out.ses[c] = std::sqrt(std::max(0.0, var) / B);
            }
        }
    }
};

void fill_grid_axes(const GridSpec& g, MomentField& f) {
    const int n_t = g.n_steps(), n_x = g.n_x();
    f.times.resize(static_cast<std::size_t>(n_t + 1));
    f.xs.resize(static_cast<std::size_t>(n_x));
    for (int k = 0; k <= n_t; ++k) f.times[static_cast<std::size_t>(k)] = g.t(k);
    for (int i = 0; i < n_x; ++i) f.xs[static_cast<std::size_t>(i)] = g.x(i);
}

struct RegionSlope {
    double slope = 0.0;
    double se = 0.0;
    int n_points = 0;
    bool available = false; // region nonempty on the grid at all window times
    bool zero_sup = false;  // the sup vanished somewhere in the window
};

std::vector<std::size_t> window_indices(const MomentField& f, double window) {
    if (!(window > 0.0) || window > 1.0) throw ConfigError("window must lie in (0, 1]");
    const double t_lo = (1.0 - window) * f.times.back() - 1e-12;
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < f.times.size(); ++k)
        if (f.times[k] >= t_lo) idx.push_back(k);
    return idx;
}

// Slope of t -> ln sup over the cells with |x| >= alpha t, in the window.
RegionSlope region_slope(const MomentField& f, const std::vector<std::size_t>& window, double alpha) {
    RegionSlope out;
    std::vector<double> ts, ys;
    for (std::size_t k : window) {
        const double reach = alpha * f.times[k] - 1e-12;
        double sup = -1.0;
        for (std::size_t i = 0; i < f.xs.size(); ++i)
            if (std::abs(f.xs[i]) >= reach) sup = std::max(sup, f.value(k, i));
        if (sup < 0.0) return out; // region fell off the grid: unavailable
        if (sup == 0.0) {
            out.available = true;
            out.zero_sup = true;
            out.slope = -kInf;
            return out;
        }
        ts.push_back(f.times[k]);
        ys.push_back(std::log(sup)); // log_offset shifts every point equally
    }
    const int n = static_cast<int>(ts.size());
    if (n < 4) return out;
    double tm = 0.0, ym = 0.0;
    for (int i = 0; i < n; ++i) {
        tm += ts[static_cast<std::size_t>(i)];
        ym += ys[static_cast<std::size_t>(i)];
    }
    tm /= n;
    ym /= n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dt = ts[static_cast<std::size_t>(i)] - tm;
        sxx += dt * dt;
        sxy += dt * (ys[static_cast<std::size_t>(i)] - ym);
    }
    if (!(sxx > 0.0)) return out;
    out.slope = sxy / sxx;
    double rss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = ys[static_cast<std::size_t>(i)] - ym - out.slope * (ts[static_cast<std::size_t>(i)] - tm);
        rss += r * r;
    }
    out.se = n > 2 ? std::sqrt(rss / ((n - 2) * sxx)) : 0.0;
    out.n_points = n;
    out.available = true;
    return out;
}

} // namespace

void MomentField::validate() const {
    if (nu < 1) throw ConfigError("moment field: nu must be >= 1");
    if (times.empty() || xs.empty()) throw ConfigError("moment field: empty grid");
    if (values.size() != times.size() * xs.size() || ses.size() != values.size())
        throw ConfigError("moment field: value/se shape does not match the grid");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw ConfigError("moment field: times must increase");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw ConfigError("moment field: xs must increase");
}

MomentField moment_field(const GridSpec& grid, std::span<const PathField> paths, int nu) {
    grid.validate();
    if (nu < 1) throw ConfigError("moment_field: nu must be >= 1");
    if (paths.size() < 2) throw ConfigError("moment_field: need at least 2 paths");
    const int n_t = grid.n_steps(), n_x = grid.n_x();
    const std::size_t cells = static_cast<std::size_t>(n_t + 1) * n_x;
    for (const PathField& p : paths) {
        if (p.n_t != n_t || p.n_x != n_x) throw ConfigError("moment_field: path does not match the grid");
        if (p.config_hash != paths.front().config_hash)
            throw ConfigError("moment_field: paths come from different configs");
    }

    const long n = static_cast<long>(paths.size());
    const int B = batch_count(n);
    BatchStats stats(cells);
    std::vector<double> batch_sum(cells);
    for (int b = 0; b < B; ++b) {
        const long lo = b * n / B, hi = (b + 1) * n / B;
        std::fill(batch_sum.begin(), batch_sum.end(), 0.0);
        for (long p = lo; p < hi; ++p)
            for (std::size_t c = 0; c < cells; ++c)
                batch_sum[c] += abs_pow(paths[static_cast<std::size_t>(p)].values[c], nu);
        stats.fold(batch_sum, hi - lo);
    }

    MomentField out;
    out.nu = nu;
    fill_grid_axes(grid, out);
    stats.finish(out, n, B);
    out.n_paths = n;
    out.source = FieldSource::MonteCarlo;
    return out;
}

std::vector<MomentField> moment_fields_mc(const SimConfig& config, const std::vector<int>& nus, int workers) {
    config.validate();
    if (nus.empty()) throw ConfigError("moment_fields_mc: no moment orders requested");
    for (int nu : nus)
        if (nu < 1) throw ConfigError("moment_fields_mc: nu must be >= 1");
    if (config.n_paths < 2) throw ConfigError("moment_fields_mc: need at least 2 paths");
    int W = workers > 0 ? workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    const std::size_t cells = static_cast<std::size_t>(config.grid.n_steps() + 1) * config.grid.n_x();
    const long n = config.n_paths;
    const int B = batch_count(n);
    W = std::min(W, B);

    std::vector<BatchStats> stats;
    stats.reserve(nus.size());
    for (std::size_t q = 0; q < nus.size(); ++q) stats.emplace_back(cells);

    // One task per batch; a group of at most W batches runs concurrently and is
    // folded in batch order, so the result is bit-identical for any W.
    for (int g0 = 0; g0 < B; g0 += W) {
        const int g1 = std::min(B, g0 + W);
        std::vector<std::vector<std::vector<double>>> sums(static_cast<std::size_t>(g1 - g0));
        std::vector<std::thread> threads;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(g1 - g0));
        for (int b = g0; b < g1; ++b) {
            sums[static_cast<std::size_t>(b - g0)].assign(nus.size(), std::vector<double>(cells, 0.0));
            threads.emplace_back([&, b]() {
                try {
                    auto& dst = sums[static_cast<std::size_t>(b - g0)];
                    const long lo = b * n / B, hi = (b + 1) * n / B;
                    for (long p = lo; p < hi; ++p) {
                        const PathField path = simulate_path(config, p);
                        for (std::size_t q = 0; q < nus.size(); ++q) {
                            const int nu = nus[q];
                            for (std::size_t c = 0; c < cells; ++c) dst[q][c] += abs_pow(path.values[c], nu);
                        }
                    }
                } catch (...) {
                    errors[static_cast<std::size_t>(b - g0)] = std::current_exception();
                }
            });
        }
        for (std::thread& t : threads) t.join();
        for (const std::exception_ptr& e : errors)
            if (e) std::rethrow_exception(e);
        for (int b = g0; b < g1; ++b) {
            const long lo = b * n / B, hi = (b + 1) * n / B;
            for (std::size_t q = 0; q < nus.size(); ++q)
                stats[q].fold(sums[static_cast<std::size_t>(b - g0)][q], hi - lo);
        }
    }

    std::vector<MomentField> out(nus.size());
    for (std::size_t q = 0; q < nus.size(); ++q) {
        out[q].nu = nus[q];
        fill_grid_axes(config.grid, out[q]);
        stats[q].finish(out[q], n, B);
        out[q].n_paths = n;
        out[q].source = FieldSource::MonteCarlo;
    }
    return out;
}

MomentField moment_field_mc(const SimConfig& config, int nu, int workers) {
    return moment_fields_mc(config, {nu}, workers).front();
}

SlopeFit lyapunov_estimate(const MomentField& field, double window) {
    field.validate();
    const RegionSlope r = region_slope(field, window_indices(field, window), 0.0);
    if (!r.available || r.zero_sup || r.n_points < 4)
        throw NumericalError("lyapunov_estimate: need at least 4 window times with a positive sup");
    return SlopeFit{r.slope, r.se, r.n_points};
}

std::string trend_label(RegionTrend t) {
    switch (t) {
    case RegionTrend::Grow:
        return "grow";
    case RegionTrend::Decay:
        return "decay";
    case RegionTrend::DeadBand:
        return "dead-band";
    case RegionTrend::Unavailable:
        return "unavailable";
    }
    return "unavailable";
}

GrowthIndexReport growth_index_estimate(const MomentField& field, const std::vector<double>& alphas,
                                        double window, double delta) {
    field.validate();
    if (alphas.empty()) throw ConfigError("growth_index_estimate: empty alpha grid");
    for (double a : alphas)
        if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("growth_index_estimate: alphas must be >= 0");
    if (!(delta >= 0.0)) throw ConfigError("growth_index_estimate: delta must be >= 0");
    const std::vector<std::size_t> win = window_indices(field, window);

    GrowthIndexReport rep;
    rep.alphas = alphas;
    rep.window = window;
    rep.delta = delta;
    rep.slopes.resize(alphas.size());
    rep.slope_ses.resize(alphas.size());
    rep.trends.resize(alphas.size());

    double best_grow = -1.0, best_decay = kInf;
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        const RegionSlope r = region_slope(field, win, alphas[a]);
        if (!r.available || (!r.zero_sup && r.n_points < 4)) {
            rep.slopes[a] = 0.0;
            rep.slope_ses[a] = 0.0;
            rep.trends[a] = RegionTrend::Unavailable;
            continue;
        }
        rep.slopes[a] = r.slope;
        rep.slope_ses[a] = r.se;
        if (r.zero_sup || r.slope < -delta)
            rep.trends[a] = RegionTrend::Decay;
        else if (r.slope > delta)
            rep.trends[a] = RegionTrend::Grow;
        else
            rep.trends[a] = RegionTrend::DeadBand;
        if (rep.trends[a] == RegionTrend::Grow) best_grow = std::max(best_grow, alphas[a]);
        if (rep.trends[a] == RegionTrend::Decay) best_decay = std::min(best_decay, alphas[a]);
    }
    rep.lambda_lower_hat = best_grow >= 0.0 ? best_grow : 0.0;
    rep.lambda_upper_hat = best_decay;

    const RegionSlope whole = region_slope(field, win, 0.0);
    rep.gamma_bar_hat = whole.available ? whole.slope : -kInf;
    return rep;
}

double discounted_sup_norm(const MomentField& field, double beta, double c) {
    field.validate();
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("discounted_sup_norm: beta must be >= 0");
    if (!std::isfinite(c)) throw ConfigError("discounted_sup_norm: c must be finite");
    const double inv_nu = 2.0 / static_cast<double>(field.nu);
    double best = -kInf;
    for (std::size_t k = 0; k < field.times.size(); ++k)
        for (std::size_t i = 0; i < field.xs.size(); ++i) {
            const double v = field.value(k, i);
            if (v <= 0.0) continue;
            const double s = -beta * field.times[k] + c * field.xs[i] +
                             inv_nu * (std::log(v) + field.log_offset);
            best = std::max(best, s);
        }
    return best == -kInf ? 0.0 : std::exp(0.5 * best);
}

double cone_exterior_l2(const MomentField& field, double alpha, double beta) {
    field.validate();
    if (field.nu != 2) throw ConfigError("cone_exterior_l2: needs a second-moment field");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("cone_exterior_l2: alpha must be >= 0");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("cone_exterior_l2: beta must be >= 0");
    const double dx = field.xs.size() > 1 ? field.xs[1] - field.xs[0] : 0.0;
    const double scale = std::exp(field.log_offset);
    double total = 0.0;
    for (std::size_t k = 0; k < field.times.size(); ++k) {
        const double t = field.times[k];
        // Trapezoid weight in time.
        double wt;
        if (field.times.size() == 1)
            wt = 1.0;
        else if (k == 0)
            wt = 0.5 * (field.times[1] - field.times[0]);
        else if (k + 1 == field.times.size())
            wt = 0.5 * (field.times[k] - field.times[k - 1]);
        else
            wt = 0.5 * (field.times[k + 1] - field.times[k - 1]);
        double mass = 0.0;
        const double reach = alpha * t - 1e-12;
        for (std::size_t i = 0; i < field.xs.size(); ++i)
            if (std::abs(field.xs[i]) >= reach) mass += field.value(k, i);
        total += wt * std::exp(-beta * t) * mass * dx * scale;
    }
    return total;
}

} // namespace peaklab
