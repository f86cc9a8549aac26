#include "peaklab/levy.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <sstream>

namespace peaklab {

namespace {

using GK15 = boost::math::quadrature::gauss_kronrod<double, 15>;

// Adaptive Gauss-Kronrod with the non-convergence contract: if the reported
// error estimate is far off the requested tolerance we refuse the value.
template <typename F>
double integrate_gk(const F& f, double a, double b, const QuadratureSpec& q, const char* what) {
    double err = 0.0;
    const double v = GK15::integrate(f, a, b, q.max_depth, q.rel_tol, &err);
    const double scale = std::max(std::abs(v), 1e-300);
    if (!std::isfinite(v) || err > 1e4 * q.rel_tol * scale + 1e-305) {
        std::ostringstream msg;
        msg << what << ": quadrature did not converge (achieved relative error "
            << err / scale << ", requested " << q.rel_tol << ")";
        throw NumericalError(msg.str());
    }
    return v;
}

template <typename F>
double integrate_ts(const F& f, double a, double b, const QuadratureSpec& q, const char* what) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    double err = 0.0, l1 = 0.0; // err is already relative (to the L1 norm)
    const double v = integrator.integrate(f, a, b, q.rel_tol, &err, &l1);
    if (!std::isfinite(v) || err > 1e4 * q.rel_tol) {
        std::ostringstream msg;
        msg << what << ": quadrature did not converge (achieved relative error " << err
            << ", requested " << q.rel_tol << ")";
        throw NumericalError(msg.str());
    }
    return v;
}

// integral_0^inf (1 - cos r) r^{-1-alpha} dr, the stable-exponent constant.
double stable_constant(double alpha) {
    return kPi / (2.0 * std::tgamma(1.0 + alpha) * std::sin(kPi * alpha / 2.0));
}

// Switch point between direct quadrature of the truncated-stable exponent and
// its large-frequency expansion; both branches agree to ~1e-8 around it.
constexpr double kPsiAsymptoticCut = 50.0;

double psi_trunc_stable(const LevyModel& m, double a) {
    const double alpha = m.alpha;
    if (a <= kPsiAsymptoticCut) {
        // Substituting z = u^p with p = 1/(2 - alpha) turns the integrand
        // 2 (1 - cos(a z)) z^{-1-alpha} exactly into p a^2 sinc^2(a u^p / 2):
        // bounded, smooth, and nonnegative on [0, 1], so the adaptive rule
        // never fights an endpoint singularity or sign cancellation.
        const double p = 1.0 / (2.0 - alpha);
        auto f = [&](double u) {
            const double w = 0.5 * a * std::pow(u, p);
            const double sc = w < 1e-8 ? 1.0 : std::sin(w) / w;
            return p * a * a * sc * sc;
        };
        return integrate_gk(f, 0.0, 1.0, m.quad, "psi");
    }
    // 2 a^alpha * integral_0^a (1-cos r) r^{-1-alpha} dr with the tail of the
    // integral expanded by parts to three orders.
    const double J = stable_constant(alpha);
    return 2.0 * J * std::pow(a, alpha) - 2.0 / alpha - 2.0 * std::sin(a) / a +
           2.0 * (1.0 + alpha) * std::cos(a) / (a * a) +
           2.0 * (1.0 + alpha) * (2.0 + alpha) * std::sin(a) / (a * a * a);
}

// Smooth large-frequency surrogate for the truncated-stable exponent (the
// oscillatory terms integrate to nothing at the tolerances we work to).
double psi_smooth_tail(const LevyModel& m, double xi) {
    return 2.0 * stable_constant(m.alpha) * std::pow(xi, m.alpha) - 2.0 / m.alpha;
}

double variance_rate(const LevyModel& m) {
    // Var X_t = t * integral z^2 of the jump measure (plus kappa t for Brownian).
    return m.kind == LevyKind::Brownian ? m.kappa : 2.0 / (2.0 - m.alpha);
}

} // namespace

LevyModel LevyModel::brownian(double kappa) {
    LevyModel m;
    m.kind = LevyKind::Brownian;
    m.kappa = kappa;
    m.validate();
    return m;
}

LevyModel LevyModel::truncated_stable(double alpha, QuadratureSpec quad) {
    LevyModel m;
    m.kind = LevyKind::TruncatedStable;
    m.alpha = alpha;
    m.quad = quad;
    m.validate();
    return m;
}

void LevyModel::validate() const {
    if (kind == LevyKind::Brownian) {
        if (!(kappa > 0.0) || !std::isfinite(kappa))
            throw ConfigError("model.kappa must be a positive finite number");
    } else {
        if (!(alpha > 1.0) || !(alpha < 2.0))
            throw ConfigError("model.alpha must lie strictly inside (1, 2)");
    }
    if (!(quad.xi_max > 0.0) || !std::isfinite(quad.xi_max))
        throw ConfigError("model.xi_max must be a positive finite number");
    if (!(quad.rel_tol > 0.0) || quad.rel_tol > 1e-2)
        throw ConfigError("model.rel_tol must lie in (0, 1e-2]");
    if (quad.max_depth < 5 || quad.max_depth > 30)
        throw ConfigError("model.max_depth must lie in [5, 30]");
}

double psi(const LevyModel& model, double xi) {
    const double a = std::abs(xi);
    if (a == 0.0) return 0.0;
    if (model.kind == LevyKind::Brownian) return 0.5 * model.kappa * a * a;
    return psi_trunc_stable(model, a);
}

double upsilon(const LevyModel& model, double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("upsilon: beta must be positive and finite");
    if (model.kind == LevyKind::Brownian) {
        const double kappa = model.kappa;
        const double X = 1000.0 * std::sqrt(beta / kappa);
        auto f = [&](double xi) { return 1.0 / (beta + kappa * xi * xi); };
        double total = integrate_gk(f, 0.0, X, model.quad, "upsilon");
        // Tail by the alternating series integral_X^inf = (1/(kappa X)) sum (-q)^m/(2m+1).
        const double q = beta / (kappa * X * X);
        total += (1.0 / (kappa * X)) * (1.0 - q / 3.0 + q * q / 5.0 - q * q * q / 7.0);
        return total / kPi;
    }

    const double alpha = model.alpha;
    const double Xi = model.quad.xi_max;
    const double J = stable_constant(alpha);
    auto f = [&](double xi) { return 1.0 / (beta + 2.0 * psi(model, xi)); };
    // Split at the exponent's evaluation switch point: the resolvent peak at
    // the origin has width ~sqrt(beta), far too narrow for the subdivision
    // depth to reach from a single interval of length xi_max.
    const double cut = std::min(kPsiAsymptoticCut, Xi);
    double main_part = integrate_gk(f, 0.0, cut, model.quad, "upsilon");
    if (Xi > cut) main_part += integrate_gk(f, cut, Xi, model.quad, "upsilon");

    // Magnitude of what lies beyond the cutoff, using Psi ~ 2 J xi^alpha.
    const double tail_estimate = std::pow(Xi, 1.0 - alpha) / (4.0 * J * (alpha - 1.0));
    if (Xi < 100.0) {
        // Too small for the expansion to hold; refuse rather than guess.
        std::ostringstream msg;
        msg << "upsilon: tail-truncation error estimate " << tail_estimate / std::max(main_part, 1e-300)
            << " exceeds tolerance " << model.quad.rel_tol
            << "; increase model.xi_max (currently " << Xi << ", need >= 100)";
        throw NumericalError(msg.str());
    }
    // Fold the tail in exactly with the substitution u = xi^{1-alpha}, which
    // maps [Xi, inf) to (0, Xi^{1-alpha}] and flattens the integrand.
    const double u0 = std::pow(Xi, 1.0 - alpha);
    auto tail = [&](double u) {
        const double xi = std::pow(u, 1.0 / (1.0 - alpha));
        const double dxidu = std::pow(u, alpha / (1.0 - alpha)) / (alpha - 1.0);
        return dxidu / (beta + 2.0 * psi_smooth_tail(model, xi));
    };
    const double tail_part = integrate_gk(tail, 0.0, u0, model.quad, "upsilon tail");
    return (main_part + tail_part) / kPi;
}

double upsilon_inverse(const LevyModel& model, double y) {
    if (!(y > 0.0) || !std::isfinite(y)) throw ConfigError("upsilon_inverse: y must be positive and finite");
    double lo = 1.0, hi = 1.0;
    if (upsilon(model, 1.0) > y) {
        while (upsilon(model, hi) > y) {
            hi *= 8.0;
            if (hi > 1e306) throw NumericalError("upsilon_inverse: failed to bracket (y too small)");
        }
        lo = hi / 8.0;
    } else {
        while (upsilon(model, lo) < y) {
            lo /= 8.0;
            if (lo < 1e-306) throw NumericalError("upsilon_inverse: failed to bracket (y too large)");
        }
        hi = lo * 8.0;
    }
    for (int iter = 0; iter < 400; ++iter) {
        const double mid = std::sqrt(lo * hi); // geometric midpoint: brackets span decades
        const double u = upsilon(model, mid);
        if (std::abs(u - y) <= 1e-10 * y) return mid;
        (u > y ? lo : hi) = mid;
    }
    throw NumericalError("upsilon_inverse: bisection failed to reach tolerance");
}

double mgf_log(const LevyModel& model, double c) {
    if (!std::isfinite(c)) throw ConfigError("mgf_log: c must be finite");
    if (model.kind == LevyKind::Brownian) return 0.5 * model.kappa * c * c;
    if (c == 0.0) return 0.0;
    const double a = std::abs(c); // the exponent is even in c
    // cosh(cz) - 1 = 2 sinh^2(cz/2), written through sinh(u)/u as in psi so
    // the z -> 0 endpoint stays finite in floating point.
    auto f = [&](double z) {
        const double u = 0.5 * a * z;
        const double sh = u < 1e-8 ? 1.0 : std::sinh(u) / u;
        return a * a * sh * sh * std::pow(z, 1.0 - model.alpha);
    };
    return integrate_ts(f, 0.0, 1.0, model.quad, "mgf_log");
}

double legendre(const LevyModel& model, double a) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("legendre: speed must be >= 0 and finite");
    if (a == 0.0) return 0.0; // M >= 0 with M(0) = 0, so the sup sits at c = 0
    auto g = [&](double c) { return a * c - mgf_log(model, c); };

    // Grow the bracket geometrically until the objective has started to fall;
    // concavity then pins the maximiser inside [0, hi].
    double prev_c = 0.0, prev_g = 0.0;
    double hi = 1.0;
    for (int k = 0; k < 2200; ++k) {
        const double gh = g(hi);
        if (!(gh > prev_g)) break;
        prev_c = hi;
        prev_g = gh;
        hi *= 2.0;
        if (k == 2199) throw NumericalError("legendre: maximiser bracket did not close");
    }
    double lo = prev_c > 0.0 ? prev_c / 2.0 : 0.0;

    // Golden-section refinement of the concave objective.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c1 = hi - inv_phi * (hi - lo), c2 = lo + inv_phi * (hi - lo);
    double g1 = g(c1), g2 = g(c2);
    while (hi - lo > 1e-11 * (1.0 + hi)) {
        if (g1 < g2) {
            lo = c1;
            c1 = c2;
            g1 = g2;
            c2 = lo + inv_phi * (hi - lo);
            g2 = g(c2);
        } else {
            hi = c2;
            c2 = c1;
            g2 = g1;
            c1 = hi - inv_phi * (hi - lo);
            g1 = g(c1);
        }
    }
    return std::max({g1, g2, 0.0});
}

DensityResult transition_density(const LevyModel& model, double t, const std::vector<double>& xs) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("transition_density: t must be positive");
    if (xs.size() < 2) throw ConfigError("transition_density: need at least two grid nodes");
    const double dx = xs[1] - xs[0];
    if (!(dx > 0.0)) throw ConfigError("transition_density: grid must be increasing");
    for (std::size_t i = 1; i + 1 < xs.size(); ++i)
        if (std::abs((xs[i + 1] - xs[i]) - dx) > 1e-9 * dx)
            throw ConfigError("transition_density: grid must be uniform");

    // Frequency cutoff: damp the integrand to exp(-46).
    double Xi;
    if (model.kind == LevyKind::Brownian) {
        Xi = std::sqrt(92.0 / (t * model.kappa));
    } else {
        Xi = std::pow(46.0 / (2.0 * stable_constant(model.alpha) * t), 1.0 / model.alpha);
        while (t * psi(model, Xi) < 46.0) Xi *= 1.25;
    }
    // Frequency step: alias images of the sampled inversion sit 2 pi / dxi
    // away; push them past the grid plus a dispersal margin.
    const double margin = 10.0 * std::sqrt(variance_rate(model) * t) + 5.0;
    const double span = std::max(std::abs(xs.front()), std::abs(xs.back())) + margin;
    const double dxi = 2.0 * kPi / span;
    const std::size_t n_xi = static_cast<std::size_t>(std::ceil(Xi / dxi)) + 1;
    if (n_xi > 8'000'000) throw NumericalError("transition_density: frequency grid too large (t too small for this x-grid)");

    std::vector<double> damp(n_xi);
    for (std::size_t k = 0; k < n_xi; ++k) damp[k] = std::exp(-t * psi(model, k * dxi));

    DensityResult out;
    out.values.resize(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double x = xs[j];
        double acc = 0.5 * damp[0]; // trapezoid endpoint (cos(0) = 1)
        for (std::size_t k = 1; k + 1 < n_xi; ++k) acc += std::cos(k * dxi * x) * damp[k];
        acc += 0.5 * std::cos((n_xi - 1) * dxi * x) * damp[n_xi - 1];
        out.values[j] = acc * dxi / kPi;
    }

    const double edge = std::max(std::abs(out.values.front()), std::abs(out.values.back()));
    if (edge * dx > 1e-6)
        throw ConfigError("transition_density: visible mass at the grid edge; widen the x-grid");

    for (double& v : out.values) {
        if (v < 0.0) {
            out.clamped_mass += -v * dx;
            v = 0.0;
        }
    }
    return out;
}

double transition_density_at(const LevyModel& model, double t, double x) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("transition_density_at: t must be positive");
    double Xi;
    if (model.kind == LevyKind::Brownian) {
        Xi = std::sqrt(92.0 / (t * model.kappa));
    } else {
        Xi = std::pow(46.0 / (2.0 * stable_constant(model.alpha) * t), 1.0 / model.alpha);
        while (t * psi(model, Xi) < 46.0) Xi *= 1.25;
    }
    auto f = [&](double xi) { return std::cos(xi * x) * std::exp(-t * psi(model, xi)); };
    return std::max(0.0, integrate_gk(f, 0.0, Xi, model.quad, "transition_density_at") / kPi);
}

} // namespace peaklab
