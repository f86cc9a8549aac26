#include "peaklab/renewal.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <cstdio>
#include <fftw3.h>
#include <limits>
#include <mutex>

namespace peaklab {

namespace {

std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

int next_pow2(int n) {
    int p = 16;
    while (p < n) p *= 2;
    return p;
}

// One fixed-size real<->half-complex FFT pair. FFTW planning is not
// thread-safe, so plan creation/destruction is serialised.
class FftEngine {
  public:
    explicit FftEngine(int p) : p_(p) {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        rbuf_ = fftw_alloc_real(p_);
        cbuf_ = fftw_alloc_complex(p_ / 2 + 1);
        if (!rbuf_ || !cbuf_) throw NumericalError("FFT buffers: allocation failed");
        fwd_ = fftw_plan_dft_r2c_1d(p_, rbuf_, cbuf_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_1d(p_, cbuf_, rbuf_, FFTW_ESTIMATE);
        if (!fwd_ || !bwd_) throw NumericalError("FFT plans: creation failed");
    }
    ~FftEngine() {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(rbuf_);
        fftw_free(cbuf_);
    }
    FftEngine(const FftEngine&) = delete;
    FftEngine& operator=(const FftEngine&) = delete;

    int size() const { return p_; }
    int n_freq() const { return p_ / 2 + 1; }

    // Spectrum of a symmetric row spanning cells -h..h (centre at index h).
    // Symmetry makes the transform real; the imaginary part is discarded.
    void row_spectrum(const std::vector<double>& row, int h, double* out_re) {
        std::fill(rbuf_, rbuf_ + p_, 0.0);
        for (int j = -h; j <= h; ++j) rbuf_[j >= 0 ? j : p_ + j] = row[static_cast<std::size_t>(j + h)];
        fftw_execute(fwd_);
        for (int k = 0; k < n_freq(); ++k) out_re[k] = cbuf_[k][0];
    }

    void slice_spectrum(const double* f, int n, double* out_re, double* out_im) {
        std::copy(f, f + n, rbuf_);
        std::fill(rbuf_ + n, rbuf_ + p_, 0.0);
        fftw_execute(fwd_);
        for (int k = 0; k < n_freq(); ++k) {
            out_re[k] = cbuf_[k][0];
            out_im[k] = cbuf_[k][1];
        }
    }

    // Inverse transform (with the 1/P normalisation) into `out`, first n values.
    void inverse(const double* re, const double* im, double* out, int n) {
        for (int k = 0; k < n_freq(); ++k) {
            cbuf_[k][0] = re[k];
            cbuf_[k][1] = im[k];
        }
        fftw_execute(bwd_);
        const double inv = 1.0 / p_;
        for (int i = 0; i < n; ++i) out[i] = rbuf_[i] * inv;
    }

  private:
    int p_ = 0;
    double* rbuf_ = nullptr;
    fftw_complex* cbuf_ = nullptr;
    fftw_plan fwd_{}, bwd_{};
};

struct KernelRow {
    int h = 0;                // row spans cells -h..h
    std::vector<double> mass; // length 2h+1, already scaled by lambda^2 and time weight
};

// Gaussian cell masses: integral of N(0, s^2) over [(j-1/2)dx, (j+1/2)dx].
std::vector<double> gaussian_cell_masses(double s, double dx, int h) {
    std::vector<double> m(static_cast<std::size_t>(2 * h + 1));
    for (int j = -h; j <= h; ++j) {
        const double a = ((j - 0.5) * dx) / s;
        const double b = ((j + 0.5) * dx) / s;
        m[static_cast<std::size_t>(j + h)] = normal_cdf(b) - normal_cdf(a);
    }
    return m;
}

// Squared L^2 norm of the lag-r heat kernel, via the kernel module.
double kernel_l2_sq(const KernelSpec& spec, double r) {
    return weighted_l2_norm_sq(spec, r, 0.0).value;
}

std::vector<KernelRow> heat_rows_brownian(const RenewalProblem& pb) {
    const double kappa = pb.equation.kappa();
    const double dt = pb.grid.dt, dx = pb.grid.dx;
    const int n_t = static_cast<int>(pb.grid.n_steps());
    const double lam2 = pb.lambda * pb.lambda;
    std::vector<KernelRow> rows(static_cast<std::size_t>(n_t));
    for (int l = 1; l <= n_t; ++l) {
        // Exact time integral of ||p_r||^2 over the lag cell (absorbs 1/sqrt(r));
        // spatial shape of p_r^2 frozen at the midpoint lag.
        const double c = (std::sqrt(l * dt) - std::sqrt((l - 1) * dt)) / std::sqrt(kPi * kappa);
        const double s = std::sqrt(0.5 * kappa * (l - 0.5) * dt);
        const int h = static_cast<int>(std::ceil(8.0 * s / dx)) + 1;
        KernelRow row;
        row.h = h;
        row.mass = gaussian_cell_masses(s, dx, h);
        for (double& v : row.mass) v *= lam2 * c;
        rows[static_cast<std::size_t>(l - 1)] = std::move(row);
    }
    return rows;
}

std::vector<KernelRow> heat_rows_trunc_stable(const RenewalProblem& pb) {
    const LevyModel& m = pb.equation.model;
    const double dt = pb.grid.dt, dx = pb.grid.dx;
    const int n_t = static_cast<int>(pb.grid.n_steps());
    const double lam2 = pb.lambda * pb.lambda;
    const double var_rate = 2.0 / (2.0 - m.alpha);
    std::vector<KernelRow> rows(static_cast<std::size_t>(n_t));
    boost::math::quadrature::tanh_sinh<double> ts;
    for (int l = 1; l <= n_t; ++l) {
        const double r_mid = (l - 0.5) * dt;
        // Scalar weight: integral of ||p_r||^2 over the lag cell. The first few
        // cells feel the r^{-1/alpha} singularity, so integrate them properly;
        // afterwards the midpoint rectangle is accurate.
        double c;
        if (l <= 4) {
            auto f = [&](double r) { return kernel_l2_sq(pb.equation, r); };
            c = ts.integrate(f, (l - 1) * dt, l * dt);
        } else {
            c = dt * kernel_l2_sq(pb.equation, r_mid);
        }
        // Shape: normalised cell masses of p_{r_mid}^2.
        const double W = 10.0 * std::sqrt(var_rate * r_mid) + 6.0;
        const int h = static_cast<int>(std::ceil(W / dx));
        std::vector<double> xs(static_cast<std::size_t>(2 * h + 1));
        for (int j = -h; j <= h; ++j) xs[static_cast<std::size_t>(j + h)] = j * dx;
        const DensityResult dens = transition_density(m, r_mid, xs);
        KernelRow row;
        row.h = h;
        row.mass.resize(xs.size());
        double total = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            row.mass[i] = dens.values[i] * dens.values[i] * dx;
            total += row.mass[i];
        }
        if (!(total > 0.0)) throw NumericalError("second-moment rows: degenerate density shape");
        for (double& v : row.mass) v *= lam2 * c / total;
        rows[static_cast<std::size_t>(l - 1)] = std::move(row);
    }
    return rows;
}

std::vector<KernelRow> wave_rows(const RenewalProblem& pb) {
    const double kappa = pb.equation.kappa();
    const double dt = pb.grid.dt, dx = pb.grid.dx;
    const int n_t = static_cast<int>(pb.grid.n_steps());
    const double lam2 = pb.lambda * pb.lambda;
    std::vector<KernelRow> rows(static_cast<std::size_t>(n_t));
    for (int l = 1; l <= n_t; ++l) {
        // Cell masses of Gamma_{l dt}^2 = (1/4) 1[|y| <= kappa l dt], exact by
        // cell/cone overlap, times the trapezoid time weight dt.
        const double reach = kappa * l * dt;
        const int h = static_cast<int>(std::ceil(reach / dx + 0.5));
        KernelRow row;
        row.h = h;
        row.mass.assign(static_cast<std::size_t>(2 * h + 1), 0.0);
        for (int j = -h; j <= h; ++j) {
            const double lo = std::max(j * dx - 0.5 * dx, -reach);
            const double hi = std::min(j * dx + 0.5 * dx, reach);
            if (hi > lo) row.mass[static_cast<std::size_t>(j + h)] = 0.25 * (hi - lo);
        }
        for (double& v : row.mass) v *= lam2 * dt;
        rows[static_cast<std::size_t>(l - 1)] = std::move(row);
    }
    return rows;
}

// Deterministic part of the heat solution for the Brownian generator, exact per
// profile kind.
double heat_mean_brownian(const Profile& u0, double kappa, double t, double x) {
    const double s = std::sqrt(kappa * t);
    switch (u0.kind) {
    case Profile::Kind::Zero:
        return 0.0;
    case Profile::Kind::Flat:
        return u0.level;
    case Profile::Kind::Bump: {
        const double a = (x - (u0.center - u0.half_width)) / s;
        const double b = (x - (u0.center + u0.half_width)) / s;
        return u0.height * (normal_cdf(a) - normal_cdf(b));
    }
    case Profile::Kind::ExpDecay: {
        const double rho = u0.rho;
        const double boost = std::exp(0.5 * rho * rho * s * s);
        const double left = std::exp(-rho * x) * normal_cdf(x / s - rho * s);
        const double right = std::exp(rho * x) * normal_cdf(-x / s - rho * s);
        return u0.height * boost * (left + right);
    }
    }
    return 0.0;
}

// Fraction of the mass of P_T u0 (or of the d'Alembert translates) that falls
// outside [-L, L]. Analytic for the wave and Brownian-heat cases; the truncated
// stable marching accounts for its own losses in forcing_field.
double escape_fraction_analytic(const RenewalProblem& problem) {
    const Profile& u0 = problem.initial.u0;
    if (u0.kind == Profile::Kind::Zero || u0.kind == Profile::Kind::Flat) return 0.0;
    const GridSpec& g = problem.grid;
    const double inf = std::numeric_limits<double>::infinity();
    const double total = u0.integral(-inf, inf);
    if (!(total > 0.0)) return 0.0;

    if (problem.equation.equation == Equation::Wave) {
        const double reach = g.L - problem.equation.kappa() * g.T;
        if (reach <= 0.0) return 1.0;
        return 1.0 - u0.integral(-reach, reach) / total;
    }

    // Heat, Brownian: escaped = (1/total) * int u0(y) [Phibar((L-y)/s) + Phibar((L+y)/s)] dy.
    const double s = std::sqrt(problem.equation.kappa() * g.T);
    double lo = -g.L - 20.0 * s, hi = g.L + 20.0 * s;
    if (u0.kind == Profile::Kind::Bump) {
        lo = u0.center - u0.half_width;
        hi = u0.center + u0.half_width;
    }
    const int n = 4000; // Simpson nodes; the decision threshold is 1e-6, not a tight tolerance
    const double h = (hi - lo) / n;
    auto f = [&](double y) {
        return u0(y) * (normal_upper_tail((g.L - y) / s) + normal_upper_tail((g.L + y) / s));
    };
    double acc = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
    double escaped = acc * h / 3.0;
    if (u0.kind == Profile::Kind::ExpDecay) // profile tail beyond the quadrature range is all escaped
        escaped += total - u0.integral(lo, hi);
    return escaped / total;
}

} // namespace

void RenewalProblem::validate() const {
    equation.validate();
    grid.validate();
    initial.u0.validate();
    initial.v0.validate();
    if (!std::isfinite(lambda)) throw ConfigError("lambda must be finite");
    if (equation.equation == Equation::Heat && !initial.v0.is_zero())
        throw ConfigError("heat equation takes no velocity profile");
}

ForcingField forcing_field(const RenewalProblem& problem) {
    problem.validate();
    if (problem.equation.equation == Equation::Wave ||
        problem.equation.model.kind == LevyKind::Brownian) {
        const double esc = escape_fraction_analytic(problem);
        if (esc > 1e-6) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "forcing field: %.3g of the initial mass leaves [-L, L] by t = T; increase grid.L",
                          esc);
            throw ConfigError(buf);
        }
    }
    const GridSpec& g = problem.grid;
    const std::size_t n_t = g.n_steps(), n_x = g.n_x();
    ForcingField out;
    out.times.resize(n_t + 1);
    out.xs.resize(n_x);
    out.values.assign((n_t + 1) * n_x, 0.0);
    for (std::size_t k = 0; k <= n_t; ++k) out.times[k] = g.t(k);
    for (std::size_t i = 0; i < n_x; ++i) out.xs[i] = g.x(i);

    const Profile& u0 = problem.initial.u0;
    if (problem.equation.equation == Equation::Wave) {
        const double kappa = problem.equation.kappa();
        const Profile& v0 = problem.initial.v0;
        for (std::size_t k = 0; k <= n_t; ++k) {
            const double t = out.times[k];
            for (std::size_t i = 0; i < n_x; ++i) {
                const double x = out.xs[i];
                double mean = 0.5 * (u0(x - kappa * t) + u0(x + kappa * t));
                if (!v0.is_zero()) mean += v0.integral(x - kappa * t, x + kappa * t) / (2.0 * kappa);
                out.values[k * n_x + i] = mean * mean;
            }
        }
        return out;
    }

    if (problem.equation.model.kind == LevyKind::Brownian) {
        const double kappa = problem.equation.kappa();
        for (std::size_t i = 0; i < n_x; ++i) {
            const double v = u0(out.xs[i]);
            out.values[i] = v * v;
        }
        for (std::size_t k = 1; k <= n_t; ++k) {
            for (std::size_t i = 0; i < n_x; ++i) {
                const double mean = heat_mean_brownian(u0, kappa, out.times[k], out.xs[i]);
                out.values[k * n_x + i] = mean * mean;
            }
        }
        return out;
    }

    // Truncated stable: march the semigroup with the dt transition row.
    const LevyModel& m = problem.equation.model;
    const double var_rate = 2.0 / (2.0 - m.alpha);
    const double W = 10.0 * std::sqrt(var_rate * g.dt) + 6.0;
    const int h = static_cast<int>(std::ceil(W / g.dx));
    std::vector<double> xs_row(static_cast<std::size_t>(2 * h + 1));
    for (int j = -h; j <= h; ++j) xs_row[static_cast<std::size_t>(j + h)] = j * g.dx;
    const DensityResult dens = transition_density(m, g.dt, xs_row);
    std::vector<double> row(xs_row.size());
    double total = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) total += (row[i] = dens.values[i] * g.dx);
    for (double& v : row) v /= total; // keep the marching mass-preserving

    std::vector<double> cur(n_x), nxt(n_x);
    double mass0 = 0.0;
    for (std::size_t i = 0; i < n_x; ++i) {
        cur[i] = u0(out.xs[i]);
        mass0 += cur[i];
        out.values[i] = cur[i] * cur[i];
    }
    for (std::size_t k = 1; k <= n_t; ++k) {
        for (std::size_t i = 0; i < n_x; ++i) {
            double acc = 0.0;
            for (int j = -h; j <= h; ++j) {
                const long src = static_cast<long>(i) - j;
                if (src >= 0 && src < static_cast<long>(n_x))
                    acc += row[static_cast<std::size_t>(j + h)] * cur[static_cast<std::size_t>(src)];
            }
            nxt[i] = acc;
            out.values[k * n_x + i] = acc * acc;
        }
        cur.swap(nxt);
    }
    if (u0.kind != Profile::Kind::Flat && mass0 > 0.0) {
        double mass_T = 0.0;
        for (double v : cur) mass_T += v;
        const double esc = 1.0 - mass_T / mass0; // rows are mass-preserving, so any loss fell off the grid
        if (esc > 1e-6) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "forcing field: %.3g of the initial mass leaves [-L, L] by t = T; increase grid.L",
                          esc);
            throw ConfigError(buf);
        }
    }
    return out;
}

MomentField solve_second_moment(const RenewalProblem& problem) {
    problem.validate();
    const GridSpec& g = problem.grid;
    const int n_t = static_cast<int>(g.n_steps());
    const int n_x = static_cast<int>(g.n_x());

    const ForcingField forcing = forcing_field(problem);

    std::vector<KernelRow> rows;
    double w_last = 1.0; // weight of the oldest lag (the slice at t = 0)
    if (problem.equation.equation == Equation::Wave) {
        rows = wave_rows(problem);
        w_last = 0.5; // trapezoid in time; the lag-0 row is identically zero
    } else if (problem.equation.model.kind == LevyKind::Brownian) {
        rows = heat_rows_brownian(problem);
    } else {
        rows = heat_rows_trunc_stable(problem);
    }

    int h_max = 0;
    for (const KernelRow& r : rows) h_max = std::max(h_max, r.h);
    const int P = next_pow2(n_x + h_max + 1);
    FftEngine fft(P);
    const int nf = fft.n_freq();

    // Transposed (frequency-major) spectra so the per-step accumulation streams
    // contiguously in the lag index.
    std::vector<double> Kre(static_cast<std::size_t>(nf) * n_t);
    {
        std::vector<double> spec(static_cast<std::size_t>(nf));
        for (int l = 1; l <= n_t; ++l) {
            fft.row_spectrum(rows[static_cast<std::size_t>(l - 1)].mass, rows[static_cast<std::size_t>(l - 1)].h,
                             spec.data());
            for (int k = 0; k < nf; ++k) Kre[static_cast<std::size_t>(k) * n_t + (l - 1)] = spec[k];
        }
        rows.clear();
        rows.shrink_to_fit();
    }
    const int stride_f = n_t + 1;
    std::vector<double> Fre(static_cast<std::size_t>(nf) * stride_f, 0.0);
    std::vector<double> Fim(static_cast<std::size_t>(nf) * stride_f, 0.0);

    MomentField out;
    out.nu = 2;
    out.times = forcing.times;
    out.xs = forcing.xs;
    out.values.assign(static_cast<std::size_t>(n_t + 1) * n_x, 0.0);
    out.ses.assign(out.values.size(), 0.0);
    out.n_paths = 0;
    out.source = FieldSource::Oracle;

    std::vector<double> slice_re(static_cast<std::size_t>(nf)), slice_im(static_cast<std::size_t>(nf));
    std::vector<double> acc_re(static_cast<std::size_t>(nf)), acc_im(static_cast<std::size_t>(nf));
    std::vector<double> conv(static_cast<std::size_t>(n_x));

    auto store_slice_spectrum = [&](int n) {
        fft.slice_spectrum(&out.values[static_cast<std::size_t>(n) * n_x], n_x, slice_re.data(), slice_im.data());
        for (int k = 0; k < nf; ++k) {
            Fre[static_cast<std::size_t>(k) * stride_f + n] = slice_re[k];
            Fim[static_cast<std::size_t>(k) * stride_f + n] = slice_im[k];
        }
    };

    std::copy_n(forcing.values.begin(), n_x, out.values.begin());
    store_slice_spectrum(0);

    for (int n = 1; n <= n_t; ++n) {
        for (int k = 0; k < nf; ++k) {
            const double* Kk = &Kre[static_cast<std::size_t>(k) * n_t];
            const double* fr = &Fre[static_cast<std::size_t>(k) * stride_f];
            const double* fi = &Fim[static_cast<std::size_t>(k) * stride_f];
            double ar = 0.0, ai = 0.0;
            for (int l = 1; l < n; ++l) {
                ar += Kk[l - 1] * fr[n - l];
                ai += Kk[l - 1] * fi[n - l];
            }
            ar += w_last * Kk[n - 1] * fr[0];
            ai += w_last * Kk[n - 1] * fi[0];
            acc_re[static_cast<std::size_t>(k)] = ar;
            acc_im[static_cast<std::size_t>(k)] = ai;
        }
        fft.inverse(acc_re.data(), acc_im.data(), conv.data(), n_x);

        const double g_scale = std::exp(-out.log_offset);
        double* dst = &out.values[static_cast<std::size_t>(n) * n_x];
        const double* gsrc = &forcing.values[static_cast<std::size_t>(n) * n_x];
        double peak = 0.0;
        for (int i = 0; i < n_x; ++i) {
            dst[i] = std::max(0.0, gsrc[i] * g_scale + conv[i]);
            peak = std::max(peak, dst[i]);
        }
        if (!std::isfinite(peak)) throw NumericalError("second-moment solve: overflow before rescale");

        if (peak > 1e250) {
            // Rescale every stored slice and spectrum; the true field is
            // stored * exp(log_offset) from here on.
            const double shift = std::log(peak);
            const double factor = std::exp(-shift);
            out.log_offset += shift;
            for (std::size_t i = 0; i < static_cast<std::size_t>(n + 1) * n_x; ++i) out.values[i] *= factor;
            for (double& v : Fre) v *= factor;
            for (double& v : Fim) v *= factor;
        }
        store_slice_spectrum(n);
    }
    return out;
}

double growth_rate(const MomentField& field, double window) {
    return lyapunov_estimate(field, window).slope;
}

} // namespace peaklab
