#include "peaklab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "peaklab/rng.hpp"

namespace peaklab {

namespace {

// Gaussian cell masses: integral of N(0, s^2) over [(j-1/2)dx, (j+1/2)dx].
std::vector<double> gaussian_step_row(double s, double dx, int h) {
    std::vector<double> row(static_cast<std::size_t>(2 * h + 1));
    for (int j = -h; j <= h; ++j)
        row[static_cast<std::size_t>(j + h)] =
            normal_cdf((j + 0.5) * dx / s) - normal_cdf((j - 0.5) * dx / s);
    return row;
}

// One-step transition row for the truncated-stable generator; cached because a
// density inversion per path would dominate the simulation.
std::vector<double> trunc_stable_step_row(const LevyModel& m, double dt, double dx, int h) {
    static std::mutex mu;
    static std::map<std::string, std::vector<double>> cache;
    char key[160];
    std::snprintf(key, sizeof(key), "%.17g|%.17g|%.17g|%d|%.17g|%.17g|%d", m.alpha, m.quad.xi_max,
                  m.quad.rel_tol, m.quad.max_depth, dt, dx, h);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    std::vector<double> xs(static_cast<std::size_t>(2 * h + 1));
    for (int j = -h; j <= h; ++j) xs[static_cast<std::size_t>(j + h)] = j * dx;
    const DensityResult dens = transition_density(m, dt, xs);
    std::vector<double> row(xs.size());
    double total = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) total += (row[i] = dens.values[i] * dx);
    for (double& v : row) v /= total; // mass-preserving marching
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(key, row);
    return row;
}

struct StepRow {
    int h = 0;
    std::vector<double> mass;
};

StepRow heat_step_row(const SimConfig& config) {
    const GridSpec& g = config.grid;
    StepRow out;
    if (config.scheme == Scheme::HeatFiniteDifference) {
        const double r = config.equation.kappa() * g.dt / (g.dx * g.dx);
        out.h = 1;
        out.mass = {0.5 * r, 1.0 - r, 0.5 * r};
        return out;
    }
    const LevyModel& m = config.equation.model;
    if (m.kind == LevyKind::Brownian) {
        const double s = std::sqrt(m.kappa * g.dt);
        out.h = static_cast<int>(std::ceil(8.0 * s / g.dx)) + 1;
        out.mass = gaussian_step_row(s, g.dx, out.h);
        return out;
    }
    const double var_rate = 2.0 / (2.0 - m.alpha);
    const double W = 10.0 * std::sqrt(var_rate * g.dt) + 6.0;
    out.h = static_cast<int>(std::ceil(W / g.dx));
    out.mass = trunc_stable_step_row(m, g.dt, g.dx, out.h);
    return out;
}

// d'Alembert deterministic wave solution, exact via profile antiderivatives.
double wave_mean(const InitialData& init, double kappa, double t, double x) {
    double v = 0.5 * (init.u0(x - kappa * t) + init.u0(x + kappa * t));
    if (!init.v0.is_zero()) v += init.v0.integral(x - kappa * t, x + kappa * t) / (2.0 * kappa);
    return v;
}

} // namespace

void SimConfig::validate() const {
    equation.validate();
    sigma.validate();
    initial.u0.validate();
    initial.v0.validate();
    grid.validate();
    if (n_paths < 1) throw ConfigError("run.n_paths must be >= 1");
    const bool wave = equation.equation == Equation::Wave;
    if (wave != (scheme == Scheme::WaveConeMild))
        throw ConfigError("run.scheme does not match run.equation");
    if (!wave && !initial.v0.is_zero())
        throw ConfigError("heat equation takes no velocity profile");
    if (scheme == Scheme::HeatFiniteDifference) {
        if (equation.model.kind != LevyKind::Brownian)
            throw ConfigError("finite-difference scheme needs the Brownian generator");
        const double r = equation.kappa() * grid.dt / (grid.dx * grid.dx);
        if (r > 0.5 + 1e-12)
            throw ConfigError("finite-difference scheme is unstable: kappa*dt/dx^2 = " +
                              format_g17(r) + " exceeds 0.5");
    }
    if (scheme == Scheme::WaveConeMild) {
        if (std::abs(grid.dx - equation.kappa() * grid.dt) > 1e-9 * grid.dx)
            throw ConfigError("wave cone scheme needs dx = kappa*dt exactly");
    }
}

PathField simulate_heat_path(const SimConfig& config, long path_index) {
    config.validate();
    if (config.equation.equation != Equation::Heat)
        throw ConfigError("simulate_heat_path: config is not a heat run");
    const GridSpec& g = config.grid;
    const int n_t = g.n_steps(), n_x = g.n_x();
    const StepRow row = heat_step_row(config);
    const double inv_dx = 1.0 / g.dx;

    PathField f;
    f.n_t = n_t;
    f.n_x = n_x;
    f.path_index = path_index;
    f.config_hash = config.config_hash();
    f.values.assign(static_cast<std::size_t>(n_t + 1) * n_x, 0.0);

    // Cell averages of the initial profile (point sampling would misplace mass
    // at plateau edges).
    for (int i = 0; i < n_x; ++i) f.at(0, i) = config.initial.u0.cell_average(g.x(i), g.dx);

    const auto& sig = config.sigma;
    for (int k = 0; k < n_t; ++k) {
        const double* prev = &f.values[static_cast<std::size_t>(k) * n_x];
        double* next = &f.values[static_cast<std::size_t>(k + 1) * n_x];
        for (int i = 0; i < n_x; ++i) {
            double mean = 0.0;
            const int jlo = std::max(-row.h, i - (n_x - 1)), jhi = std::min(row.h, i);
            for (int j = jlo; j <= jhi; ++j) mean += row.mass[static_cast<std::size_t>(j + row.h)] * prev[i - j];
            const double dw = noise_increment(g, config.seed, static_cast<std::uint64_t>(path_index),
                                              static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(i));
            next[i] = mean + sig(prev[i]) * dw * inv_dx;
        }
    }
    return f;
}

PathField simulate_wave_path(const SimConfig& config, long path_index) {
    config.validate();
    if (config.equation.equation != Equation::Wave)
        throw ConfigError("simulate_wave_path: config is not a wave run");
    const GridSpec& g = config.grid;
    const int n_t = g.n_steps(), n_x = g.n_x();
    const double kappa = config.equation.kappa();

    PathField f;
    f.n_t = n_t;
    f.n_x = n_x;
    f.path_index = path_index;
    f.config_hash = config.config_hash();
    f.values.assign(static_cast<std::size_t>(n_t + 1) * n_x, 0.0);

    const auto& sig = config.sigma;
    auto dw = [&](int k, int i) {
        return noise_increment(g, config.seed, static_cast<std::uint64_t>(path_index),
                               static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(i));
    };

    for (int i = 0; i < n_x; ++i) f.at(0, i) = config.initial.u0(g.x(i));

    // Cone sums C_n(i) = sum of sigma(u_k(j)) dW_{kj} over |j - i| <= n-1-k,
    // advanced by the two-term recursion
    //   C_{n+1}(i) = C_n(i-1) + C_n(i+1) - C_{n-1}(i) + a_{n-1}(i) + a_n(i).
    std::vector<double> c_prev(static_cast<std::size_t>(n_x), 0.0); // C_{n-1}
    std::vector<double> c_cur(static_cast<std::size_t>(n_x), 0.0);  // C_n
    std::vector<double> c_next(static_cast<std::size_t>(n_x), 0.0);
    std::vector<double> a_prev(static_cast<std::size_t>(n_x), 0.0);
    std::vector<double> a_cur(static_cast<std::size_t>(n_x), 0.0);

    if (n_t >= 1) {
        for (int i = 0; i < n_x; ++i) {
            a_prev[static_cast<std::size_t>(i)] = sig(f.at(0, i)) * dw(0, i);
            c_cur[static_cast<std::size_t>(i)] = a_prev[static_cast<std::size_t>(i)];
        }
        for (int i = 0; i < n_x; ++i)
            f.at(1, i) = wave_mean(config.initial, kappa, g.t(1), g.x(i)) + 0.5 * c_cur[static_cast<std::size_t>(i)];
    }
    for (int n = 1; n < n_t; ++n) {
        for (int i = 0; i < n_x; ++i) a_cur[static_cast<std::size_t>(i)] = sig(f.at(n, i)) * dw(n, i);
        for (int i = 0; i < n_x; ++i) {
            const double left = i > 0 ? c_cur[static_cast<std::size_t>(i - 1)] : 0.0;
            const double right = i + 1 < n_x ? c_cur[static_cast<std::size_t>(i + 1)] : 0.0;
            c_next[static_cast<std::size_t>(i)] = left + right - c_prev[static_cast<std::size_t>(i)] +
                                                  a_prev[static_cast<std::size_t>(i)] + a_cur[static_cast<std::size_t>(i)];
        }
        const double t_next = g.t(n + 1);
        for (int i = 0; i < n_x; ++i)
            f.at(n + 1, i) = wave_mean(config.initial, kappa, t_next, g.x(i)) + 0.5 * c_next[static_cast<std::size_t>(i)];
        c_prev.swap(c_cur);
        c_cur.swap(c_next);
        a_prev.swap(a_cur);
    }
    return f;
}

PathField simulate_path(const SimConfig& config, long path_index) {
    return config.equation.equation == Equation::Wave ? simulate_wave_path(config, path_index)
                                                      : simulate_heat_path(config, path_index);
}

PicardResult picard_solve(const SimConfig& config, long path_index, int n_iter) {
    config.validate();
    if (config.equation.equation != Equation::Heat)
        throw ConfigError("picard_solve: heat equation only");
    if (n_iter < 0) throw ConfigError("picard_solve: n_iter must be >= 0");
    const GridSpec& g = config.grid;
    const int n_t = g.n_steps(), n_x = g.n_x();
    const StepRow row = heat_step_row(config);
    const double inv_dx = 1.0 / g.dx;
    const auto& sig = config.sigma;

    auto conv = [&](const double* src, double* dst) {
        for (int i = 0; i < n_x; ++i) {
            double acc = 0.0;
            const int jlo = std::max(-row.h, i - (n_x - 1)), jhi = std::min(row.h, i);
            for (int j = jlo; j <= jhi; ++j) acc += row.mass[static_cast<std::size_t>(j + row.h)] * src[i - j];
            dst[i] = acc;
        }
    };

    // Iterate zero is the initial profile frozen in time; the deterministic
    // part is marched once up front and reused by every iterate.
    const std::size_t cells = static_cast<std::size_t>(n_t + 1) * n_x;
    std::vector<double> mean(cells, 0.0);
    for (int i = 0; i < n_x; ++i) mean[static_cast<std::size_t>(i)] = config.initial.u0.cell_average(g.x(i), g.dx);

    std::vector<double> u_cur(cells);
    for (int k = 0; k <= n_t; ++k)
        std::copy_n(mean.begin(), n_x, u_cur.begin() + static_cast<std::size_t>(k) * n_x);

    PicardResult out;
    if (n_iter == 0) {
        PathField f0;
        f0.n_t = n_t;
        f0.n_x = n_x;
        f0.path_index = path_index;
        f0.config_hash = config.config_hash();
        f0.values = std::move(u_cur);
        out.field = std::move(f0);
        return out;
    }

    for (int k = 0; k < n_t; ++k)
        conv(&mean[static_cast<std::size_t>(k) * n_x], &mean[static_cast<std::size_t>(k + 1) * n_x]);

    std::vector<double> noise(static_cast<std::size_t>(n_t) * n_x);
    for (int k = 0; k < n_t; ++k)
        for (int i = 0; i < n_x; ++i)
            noise[static_cast<std::size_t>(k) * n_x + i] =
                noise_increment(g, config.seed, static_cast<std::uint64_t>(path_index),
                                static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(i)) *
                inv_dx;

    // Discount rate for the sup-norm distance between iterates.
    double beta;
    if (config.equation.model.kind == LevyKind::Brownian)
        beta = moment_threshold_heat(config.equation.kappa(), config.sigma.lip(), 0.0);
    else
        beta = moment_threshold_general(config.equation.model, config.sigma, 2, 0.0);

    std::vector<double> u_next(cells, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n_x)), v_next(static_cast<std::size_t>(n_x)),
        b(static_cast<std::size_t>(n_x));

    out.diff_norms.reserve(static_cast<std::size_t>(n_iter));
    int rising = 0;
    for (int m = 0; m < n_iter; ++m) {
        std::copy_n(mean.begin(), n_x, u_next.begin());
        std::fill(v.begin(), v.end(), 0.0);
        for (int k = 0; k < n_t; ++k) {
            const double* uk = &u_cur[static_cast<std::size_t>(k) * n_x];
            const double* wk = &noise[static_cast<std::size_t>(k) * n_x];
            for (int i = 0; i < n_x; ++i) b[static_cast<std::size_t>(i)] = sig(uk[i]) * wk[i];
            conv(v.data(), v_next.data());
            double* dst = &u_next[static_cast<std::size_t>(k + 1) * n_x];
            const double* mk = &mean[static_cast<std::size_t>(k + 1) * n_x];
            for (int i = 0; i < n_x; ++i) {
                v_next[static_cast<std::size_t>(i)] += b[static_cast<std::size_t>(i)];
                dst[i] = mk[i] + v_next[static_cast<std::size_t>(i)];
            }
            v.swap(v_next);
        }
        // Check the iterate itself for overflow: with a large rate the weight
        // underflows to zero and a non-finite cell would never reach `dist`.
        double dist = 0.0;
        bool finite = true;
        for (int k = 0; k <= n_t; ++k) {
            const double w = std::exp(-beta * g.t(k));
            const double* a = &u_cur[static_cast<std::size_t>(k) * n_x];
            const double* bb = &u_next[static_cast<std::size_t>(k) * n_x];
            for (int i = 0; i < n_x; ++i) {
                finite = finite && std::isfinite(bb[i]);
                dist = std::max(dist, w * std::abs(a[i] - bb[i]));
            }
        }
        if (!finite || !std::isfinite(dist))
            throw NumericalError("picard_solve: iterate overflowed (non-finite values); refine dt or reduce lambda");
        out.diff_norms.push_back(dist);
        if (m > 0 && dist > out.diff_norms[static_cast<std::size_t>(m - 1)]) {
            if (++rising >= 3)
                throw NumericalError("picard_solve: iteration diverging (three consecutive growths of the "
                                     "weighted distance); refine dt or reduce lambda");
        } else {
            rising = 0;
        }
        u_cur.swap(u_next);
    }

    PathField f;
    f.n_t = n_t;
    f.n_x = n_x;
    f.path_index = path_index;
    f.config_hash = config.config_hash();
    f.values = std::move(u_cur);
    out.field = std::move(f);
    return out;
}

} // namespace peaklab
