#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "peaklab/kernels.hpp"
#include "peaklab/levy.hpp"

using namespace peaklab;

namespace {

// Frozen independent references (25-digit arithmetic, see test_levy.cpp).
constexpr double kTsL2_t1 = 0.1414910974317506;    // ||p_1||^2, alpha = 1.5
constexpr double kTailBrownian_2_05_1 = 0.138531605994893; // kappa=2, alpha=0.5, beta=1
constexpr double kDens15_t05_x0 = 0.28571350696608294;
constexpr double kDens15_t05_x1 = 0.21984841759340016;

bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

} // namespace

TEST_CASE("wave kernel is the half indicator of the closed light cone") {
    const auto w = KernelSpec::wave(1.0);
    CHECK(kernel_value(w, 2.0, 1.5) == 0.5);
    CHECK(kernel_value(w, 2.0, 2.5) == 0.0);
    CHECK(kernel_value(w, 2.0, 2.0) == 0.5); // boundary included
    CHECK(kernel_value(w, 2.0, -2.0) == 0.5);
    CHECK(kernel_value(w, 2.0, -2.0000001) == 0.0);
    const auto w3 = KernelSpec::wave(3.0);
    CHECK(kernel_value(w3, 1.0, 2.9) == 0.5);
    CHECK(kernel_value(w3, 1.0, 3.1) == 0.0);
}

TEST_CASE("heat kernel evaluates the transition density") {
    const auto h = KernelSpec::heat(LevyModel::brownian(1.0));
    CHECK(rel_close(kernel_value(h, 1.0, 0.0), 1.0 / std::sqrt(2.0 * kPi), 1e-14));
    CHECK(rel_close(kernel_value(h, 2.0, 1.0), std::exp(-0.25) / (2.0 * std::sqrt(kPi)), 1e-14));

    const auto ts = KernelSpec::heat(LevyModel::truncated_stable(1.5));
    CHECK(rel_close(kernel_value(ts, 0.5, 0.0), kDens15_t05_x0, 1e-7));
    CHECK(rel_close(kernel_value(ts, 0.5, 1.0), kDens15_t05_x1, 1e-7));
}

TEST_CASE("kernel argument and spec validation") {
    const auto w = KernelSpec::wave(1.0);
    CHECK_THROWS_AS(kernel_value(w, 0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(kernel_value(w, -1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(KernelSpec::wave(0.0), ConfigError);
    CHECK_THROWS_AS(KernelSpec::wave(-2.0), ConfigError);

    KernelSpec bad;
    bad.equation = Equation::Wave;
    bad.model = LevyModel::truncated_stable(1.5);
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("wave weighted norm: closed forms, continuity at c = 0, log branch") {
    const auto w = KernelSpec::wave(1.0);
    CHECK(weighted_l2_norm_sq(w, 1.0, 0.0).value == 0.5); // quarter of cone length 2
    CHECK(rel_close(weighted_l2_norm_sq(w, 1.0, 2.0).value, std::sinh(2.0) / 4.0, 1e-12));
    CHECK(rel_close(weighted_l2_norm_sq(w, 1.0, 2.0).value, 0.90671510196175469, 1e-12));
    // even in c (two-sided exponential weight of a symmetric kernel)
    CHECK(weighted_l2_norm_sq(w, 1.0, -2.0).value == weighted_l2_norm_sq(w, 1.0, 2.0).value);

    // continuity across the small-c series branch
    const double at0 = weighted_l2_norm_sq(w, 1.0, 0.0).value;
    CHECK(std::abs(weighted_l2_norm_sq(w, 1.0, 1e-6).value - at0) <= 1e-8);
    CHECK(std::abs(weighted_l2_norm_sq(w, 1.0, -1e-6).value - at0) <= 1e-8);

    // large-c log branch agrees with the direct form while it is representable
    const auto big = weighted_l2_norm_sq(w, 1.0, 35.0);
    CHECK(rel_close(big.value, std::sinh(35.0) / 70.0, 1e-12));
    CHECK(rel_close(big.log_value, std::log(std::sinh(35.0) / 70.0), 1e-12));

    // overflow: value saturates to inf but the log stays finite and exact
    const auto huge = weighted_l2_norm_sq(w, 1.0, 800.0);
    CHECK(std::isinf(huge.value));
    CHECK(rel_close(huge.log_value, 800.0 - std::log(3200.0), 1e-12));
}

TEST_CASE("brownian heat weighted norm matches exp(kappa c^2 t/4)/(2 sqrt(pi kappa t))") {
    const auto h1 = KernelSpec::heat(LevyModel::brownian(1.0));
    CHECK(rel_close(weighted_l2_norm_sq(h1, 1.0, 0.0).value, 1.0 / (2.0 * std::sqrt(kPi)), 1e-13));
    CHECK(rel_close(weighted_l2_norm_sq(h1, 1.0, 0.0).value, 0.28209479177387814, 1e-13));

    const auto h2 = KernelSpec::heat(LevyModel::brownian(2.0));
    const double closed = std::exp(2.0 * 1.5 * 1.5 * 3.0 / 4.0) / (2.0 * std::sqrt(kPi * 2.0 * 3.0));
    CHECK(rel_close(weighted_l2_norm_sq(h2, 3.0, 1.5).value, closed, 1e-13));

    const auto over = weighted_l2_norm_sq(h1, 1.0, 60.0);
    CHECK(std::isinf(over.value));
    CHECK(rel_close(over.log_value, 900.0 - 0.5 * std::log(4.0 * kPi), 1e-12));
}

TEST_CASE("truncated stable norm: frozen reference, grid cross-check, weight rejection") {
    const auto m = LevyModel::truncated_stable(1.5);
    const auto ts = KernelSpec::heat(m);
    const double norm = weighted_l2_norm_sq(ts, 1.0, 0.0).value;
    CHECK(rel_close(norm, kTsL2_t1, 1e-8));

    // against the density sampled on a grid: integral p^2 dx
    std::vector<double> xs;
    for (int i = -700; i <= 700; ++i) xs.push_back(0.05 * i);
    const auto dens = transition_density(m, 1.0, xs).values;
    double grid = 0.0;
    for (double v : dens) grid += v * v * 0.05;
    CHECK(rel_close(norm, grid, 1e-5));

    CHECK_THROWS_AS(weighted_l2_norm_sq(ts, 1.0, 0.5), ConfigError);
    CHECK_THROWS_AS(weighted_l2_norm_sq(ts, 0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(weighted_l2_norm_sq(ts, 1.0, std::nan("")), ConfigError);
}

TEST_CASE("wave tail mass transform: closed form (kappa - alpha)^+ / (4 beta^2)") {
    CHECK(tail_mass_laplace(KernelSpec::wave(2.0), 1.0, 1.0) == 0.25);
    CHECK(tail_mass_laplace(KernelSpec::wave(1.0), 2.0, 1.0) == 0.0);
    CHECK(tail_mass_laplace(KernelSpec::wave(1.0), 1.0, 1.0) == 0.0); // empty open excess
    CHECK(tail_mass_laplace(KernelSpec::wave(3.0), 1.0, 0.5) == 2.0);
}

TEST_CASE("brownian heat tail mass transform: exact pin, frozen reference, lower bound") {
    const auto h1 = KernelSpec::heat(LevyModel::brownian(1.0));
    // at kappa = alpha = beta = 1 the transform reduces to
    // (1/(2 sqrt(pi))) integral e^{-s^2} erfc(s) ds = 1/8 exactly
    CHECK(std::abs(tail_mass_laplace(h1, 1.0, 1.0) - 0.125) <= 1e-9);

    const auto h2 = KernelSpec::heat(LevyModel::brownian(2.0));
    CHECK(rel_close(tail_mass_laplace(h2, 0.5, 1.0), kTailBrownian_2_05_1, 1e-8));

    // dominates alpha / (2 pi (beta kappa + alpha^2))
    const double v = tail_mass_laplace(h1, 1.0, 0.01);
    CHECK(v >= 1.0 / (2.0 * kPi * 1.01));
    CHECK(v >= 0.15757);
}

TEST_CASE("tail mass transform at alpha = 0 recovers half the resolvent integral") {
    for (double kappa : {1.0, 2.0}) {
        const auto m = LevyModel::brownian(kappa);
        const auto h = KernelSpec::heat(m);
        for (double beta : {0.5, 2.0})
            CHECK(rel_close(2.0 * tail_mass_laplace(h, 0.0, beta), upsilon(m, beta), 1e-5));
    }
}

TEST_CASE("tail mass transform is nonincreasing in speed and rate") {
    for (const auto& spec : {KernelSpec::heat(LevyModel::brownian(1.0)), KernelSpec::wave(2.0)}) {
        double prev = tail_mass_laplace(spec, 0.0, 0.5);
        for (double a : {0.2, 0.6, 1.0, 1.5, 2.5}) {
            const double cur = tail_mass_laplace(spec, a, 0.5);
            CHECK(cur <= prev + 1e-15);
            prev = cur;
        }
        prev = tail_mass_laplace(spec, 0.5, 0.1);
        for (double beta : {0.3, 1.0, 3.0, 10.0}) {
            const double cur = tail_mass_laplace(spec, 0.5, beta);
            CHECK(cur <= prev + 1e-15);
            prev = cur;
        }
    }
}

TEST_CASE("tail mass transform argument validation") {
    const auto h = KernelSpec::heat(LevyModel::brownian(1.0));
    CHECK_THROWS_AS(tail_mass_laplace(h, -0.5, 1.0), ConfigError);
    CHECK_THROWS_AS(tail_mass_laplace(h, 1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(tail_mass_laplace(h, 1.0, -2.0), ConfigError);
    const auto ts = KernelSpec::heat(LevyModel::truncated_stable(1.5));
    CHECK_THROWS_AS(tail_mass_laplace(ts, 1.0, 1.0), ConfigError);
}
