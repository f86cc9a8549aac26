#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "peaklab/renewal.hpp"
#include "support/reference.hpp"

using namespace peaklab;

namespace {

// Independently marched truncated-stable flat-start second moments on the
// dt = 1/8, dx = 1/4, L = 4 grid (alpha = 1.5, lambda = 1), frozen.
constexpr double kTsFlatHalf = 1.2648919452571237;
constexpr double kTsFlatOne = 1.2894008526788194;

RenewalProblem heat_problem(double kappa, double lambda, Profile u0, GridSpec grid) {
    RenewalProblem pb;
    pb.equation = KernelSpec::heat(LevyModel::brownian(kappa));
    pb.lambda = lambda;
    pb.initial.u0 = u0;
    pb.grid = grid;
    return pb;
}

RenewalProblem wave_problem(double kappa, double lambda, Profile u0, GridSpec grid) {
    RenewalProblem pb;
    pb.equation = KernelSpec::wave(kappa);
    pb.lambda = lambda;
    pb.initial.u0 = u0;
    pb.grid = grid;
    return pb;
}

double center_value(const MomentField& f, double t) {
    const std::size_t n_x = f.xs.size();
    const std::size_t k = static_cast<std::size_t>(std::llround(t / (f.times[1] - f.times[0])));
    return f.values[k * n_x + n_x / 2] * std::exp(f.log_offset);
}

double sup_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

} // namespace

TEST_CASE("problem validation") {
    auto pb = heat_problem(1.0, 1.0, Profile::flat(1.0), GridSpec{0.25, 0.25, 1.0, 2.0});
    CHECK_NOTHROW(pb.validate());

    pb.initial.v0 = Profile::flat(1.0); // heat takes no velocity profile
    CHECK_THROWS_AS(pb.validate(), ConfigError);

    pb.initial.v0 = Profile::zero();
    pb.lambda = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(pb.validate(), ConfigError);

    pb.lambda = 1.0;
    pb.grid.dt = 0.0;
    CHECK_THROWS_AS(pb.validate(), ConfigError);
}

TEST_CASE("forcing: grid layout and flat heat start") {
    const GridSpec g{0.25, 0.5, 1.0, 2.0};
    const auto pb = heat_problem(1.0, 1.0, Profile::flat(2.0), g);
    const ForcingField f = forcing_field(pb);
    REQUIRE(f.times.size() == static_cast<std::size_t>(g.n_steps()) + 1);
    REQUIRE(f.xs.size() == static_cast<std::size_t>(g.n_x()));
    REQUIRE(f.values.size() == f.times.size() * f.xs.size());
    for (std::size_t k = 0; k < f.times.size(); ++k) CHECK(f.times[k] == g.t(static_cast<int>(k)));
    for (std::size_t i = 0; i < f.xs.size(); ++i) CHECK(f.xs[i] == g.x(static_cast<int>(i)));
    // flat start: squared mean is level^2 at every node
    for (double v : f.values) CHECK(v == 4.0);
    CHECK(f.at(2, 3) == f.values[2 * f.xs.size() + 3]);
}

TEST_CASE("forcing: wave translates the start along both characteristics") {
    const GridSpec g{0.25, 0.25, 3.0, 8.0};
    auto pb = wave_problem(1.0, 1.0, Profile::bump(0.0, 1.0, 1.0), g);
    const ForcingField f = forcing_field(pb);
    const std::size_t n_x = f.xs.size();
    auto at = [&](double t, double x) {
        const std::size_t k = static_cast<std::size_t>(std::llround(t / g.dt));
        const std::size_t i = static_cast<std::size_t>(std::llround((x + g.L) / g.dx));
        return f.values[k * n_x + i];
    };
    CHECK(at(0.0, 0.0) == 1.0);
    CHECK(at(3.0, 0.0) == 0.0);    // both translates have left x = 0
    CHECK(at(3.0, 3.0) == 0.25);   // right-moving half wave
    CHECK(at(3.0, -3.0) == 0.25);
    CHECK(at(3.0, 4.0) == 0.25);   // support edge travels at speed kappa
    CHECK(at(3.0, 4.25) == 0.0);
    CHECK(at(1.0, 0.0) == 1.0);    // still inside both translates
    CHECK(at(2.0, 6.5) == 0.0);    // outside the light cone entirely

    // velocity-only start: mean is the cone average of v0
    auto pv = wave_problem(2.0, 1.0, Profile::zero(), GridSpec{0.25, 0.25, 1.0, 6.0});
    pv.initial.v0 = Profile::bump(0.0, 1.0, 2.0);
    const ForcingField fv = forcing_field(pv);
    const std::size_t nvx = fv.xs.size();
    auto atv = [&](double t, double x) {
        const std::size_t k = static_cast<std::size_t>(std::llround(t / 0.25));
        const std::size_t i = static_cast<std::size_t>(std::llround((x + 6.0) / 0.25));
        return fv.values[k * nvx + i];
    };
    CHECK(atv(1.0, 0.0) == 1.0);    // cone [-2, 2] swallows all of v0: (4 / (2 kappa))^2
    CHECK(atv(0.25, 3.0) == 0.0);   // cone [2.5, 3.5] misses the support
    CHECK(atv(0.25, 0.0) == doctest::Approx(0.25).epsilon(1e-14)); // mass 1 over 2 kappa = 2
}

TEST_CASE("forcing: heat semigroup of a bump matches direct quadrature") {
    const GridSpec g{0.25, 0.25, 1.0, 7.0};
    const auto pb = heat_problem(1.0, 1.0, Profile::bump(0.0, 1.0, 1.0), g);
    const ForcingField f = forcing_field(pb);
    const std::size_t n_x = f.xs.size();
    for (double t : {0.25, 0.5, 1.0}) {
        for (double x : {0.0, 0.75, -2.0}) {
            const double s = std::sqrt(t);
            auto kernel_times_u0 = [&](double y) {
                const double u0 = std::abs(y) <= 1.0 ? 1.0 : 0.0;
                const double z = (x - y) / s;
                return u0 * std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * kPi));
            };
            const double mean = testref::simpson(kernel_times_u0, -1.0, 1.0, 4000);
            const std::size_t k = static_cast<std::size_t>(std::llround(t / g.dt));
            const std::size_t i = static_cast<std::size_t>(std::llround((x + g.L) / g.dx));
            CHECK(f.values[k * n_x + i] == doctest::Approx(mean * mean).epsilon(1e-9));
        }
    }
}

TEST_CASE("forcing: heat semigroup of a two-sided exponential matches direct quadrature") {
    const GridSpec g{0.25, 0.5, 1.0, 16.0};
    const auto pb = heat_problem(1.0, 1.0, Profile::exp_decay(2.0, 1.0), g);
    const ForcingField f = forcing_field(pb);
    const std::size_t n_x = f.xs.size();
    for (double x : {0.0, 1.5, -3.0}) {
        auto kernel_times_u0 = [&](double y) {
            const double z = x - y;
            return 2.0 * std::exp(-std::abs(y)) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
        };
        const double mean = testref::simpson(kernel_times_u0, -40.0, 0.0, 10000) +
                            testref::simpson(kernel_times_u0, 0.0, 40.0, 10000); // split at the kink
        const std::size_t i = static_cast<std::size_t>(std::llround((x + g.L) / g.dx));
        CHECK(f.values[4 * n_x + i] == doctest::Approx(mean * mean).epsilon(1e-9));
    }
}

TEST_CASE("forcing refuses grids the initial mass escapes from") {
    using doctest::Contains;
    // heat: spread sqrt(kappa T) = 2 against a box of half-width 4
    auto hb = heat_problem(1.0, 1.0, Profile::bump(0.0, 1.0, 1.0), GridSpec{0.25, 0.25, 4.0, 4.0});
    CHECK_THROWS_WITH_AS(forcing_field(hb), Contains("increase grid.L"), ConfigError);
    // wave: support reaches L - kappa T = 0.5 < half-width
    auto wb = wave_problem(1.0, 1.0, Profile::bump(0.0, 1.0, 1.0), GridSpec{0.25, 0.25, 4.0, 4.5});
    CHECK_THROWS_WITH_AS(forcing_field(wb), Contains("increase grid.L"), ConfigError);
    // wave: cone wider than the whole box
    auto ww = wave_problem(1.0, 1.0, Profile::bump(0.0, 1.0, 1.0), GridSpec{0.25, 0.25, 4.0, 3.0});
    CHECK_THROWS_WITH_AS(forcing_field(ww), Contains("increase grid.L"), ConfigError);
    // truncated stable: the marching detects its own off-grid losses
    RenewalProblem ts;
    ts.equation = KernelSpec::heat(LevyModel::truncated_stable(1.5));
    ts.lambda = 1.0;
    ts.initial.u0 = Profile::bump(0.0, 1.0, 1.0);
    ts.grid = GridSpec{0.125, 0.25, 4.0, 5.0};
    CHECK_THROWS_WITH_AS(forcing_field(ts), Contains("increase grid.L"), ConfigError);
    // same spreads with a roomy box are accepted
    hb.grid.L = 12.0;
    CHECK_NOTHROW(forcing_field(hb));
    wb.grid.L = 6.0;
    CHECK_NOTHROW(forcing_field(wb));
}

TEST_CASE("lambda = 0 reduces the solve to the forcing field exactly") {
    const GridSpec g{0.125, 0.25, 1.0, 6.0};
    const auto pb = heat_problem(1.0, 0.0, Profile::bump(0.0, 1.0, 1.0), g);
    const ForcingField f = forcing_field(pb);
    const MomentField m = solve_second_moment(pb);
    CHECK(m.log_offset == 0.0);
    REQUIRE(m.values.size() == f.values.size());
    for (std::size_t i = 0; i < m.values.size(); ++i) CHECK(m.values[i] == f.values[i]);
}

TEST_CASE("solver output structure") {
    const auto pb = heat_problem(1.0, 1.0, Profile::flat(1.0), GridSpec{0.125, 0.25, 0.5, 2.0});
    const MomentField m = solve_second_moment(pb);
    CHECK(m.nu == 2);
    CHECK(m.source == FieldSource::Oracle);
    CHECK(m.n_paths == 0);
    CHECK(m.times.size() == 5);
    CHECK(m.xs.size() == static_cast<std::size_t>(pb.grid.n_x()));
    CHECK(m.values.size() == m.times.size() * m.xs.size());
    CHECK(m.ses.size() == m.values.size());
    for (double s : m.ses) CHECK(s == 0.0);
    CHECK_NOTHROW(m.validate());
}

TEST_CASE("fft marching equals the direct quadratic-time recursion") {
    { // heat, flat start
        const GridSpec g{0.125, 0.25, 1.0, 3.0};
        const auto pb = heat_problem(1.0, 1.0, Profile::flat(1.0), g);
        const ForcingField f = forcing_field(pb);
        const MomentField m = solve_second_moment(pb);
        const auto brute = testref::brute_heat_renewal(f.values, g.n_steps(), g.n_x(), g.dt, g.dx, 1.0, 1.0);
        CHECK(sup_abs_diff(m.values, brute.values) <= 1e-10);
    }
    { // heat, bump start, different kappa and lambda
        const GridSpec g{0.125, 0.25, 1.0, 6.0};
        const auto pb = heat_problem(0.5, 1.5, Profile::bump(0.0, 1.0, 1.0), g);
        const ForcingField f = forcing_field(pb);
        const MomentField m = solve_second_moment(pb);
        const auto brute = testref::brute_heat_renewal(f.values, g.n_steps(), g.n_x(), g.dt, g.dx, 0.5, 1.5);
        CHECK(sup_abs_diff(m.values, brute.values) <= 1e-10);
    }
    { // wave, flat start
        const GridSpec g{0.125, 0.25, 1.5, 3.0};
        const auto pb = wave_problem(1.0, 1.0, Profile::flat(1.0), g);
        const ForcingField f = forcing_field(pb);
        const MomentField m = solve_second_moment(pb);
        const auto brute = testref::brute_wave_renewal(f.values, g.n_steps(), g.n_x(), g.dt, g.dx, 1.0, 1.0);
        CHECK(sup_abs_diff(m.values, brute.values) <= 1e-10);
    }
    { // wave, displacement + velocity start
        const GridSpec g{0.125, 0.25, 1.0, 4.0};
        auto pb = wave_problem(1.0, 0.8, Profile::bump(0.0, 1.0, 1.0), g);
        pb.initial.v0 = Profile::bump(0.0, 0.5, 1.0);
        const ForcingField f = forcing_field(pb);
        const MomentField m = solve_second_moment(pb);
        const auto brute = testref::brute_wave_renewal(f.values, g.n_steps(), g.n_x(), g.dt, g.dx, 1.0, 0.8);
        CHECK(sup_abs_diff(m.values, brute.values) <= 1e-10);
    }
}

TEST_CASE("heat flat-start second moment tracks the closed form") {
    {
        const auto pb = heat_problem(1.0, 1.0, Profile::flat(1.0), GridSpec{1.0 / 64, 0.25, 4.0, 14.0});
        const MomentField m = solve_second_moment(pb);
        for (double t : {0.5, 1.0, 2.0, 3.0, 4.0}) {
            const double expect = testref::heat_flat_second_moment(1.0, 1.0, t);
            CHECK(std::abs(center_value(m, t) / expect - 1.0) <= 0.02);
        }
    }
    {
        const auto pb = heat_problem(4.0, 1.0, Profile::flat(1.0), GridSpec{1.0 / 64, 0.5, 4.0, 20.0});
        const MomentField m = solve_second_moment(pb);
        for (double t : {2.0, 4.0}) {
            const double expect = testref::heat_flat_second_moment(1.0, 4.0, t);
            CHECK(std::abs(center_value(m, t) / expect - 1.0) <= 0.01);
        }
    }
}

TEST_CASE("wave flat-start second moment tracks the closed form") {
    {
        const auto pb = wave_problem(1.0, 1.0, Profile::flat(1.0), GridSpec{1.0 / 64, 0.25, 6.0, 8.0});
        const MomentField m = solve_second_moment(pb);
        for (double t : {1.0, 3.0, 6.0}) {
            const double expect = testref::wave_flat_second_moment(1.0, 1.0, t);
            CHECK(std::abs(center_value(m, t) / expect - 1.0) <= 3e-4);
        }
    }
    {
        const auto pb = wave_problem(2.0, 1.0, Profile::flat(1.0), GridSpec{1.0 / 64, 0.25, 6.0, 14.0});
        const MomentField m = solve_second_moment(pb);
        for (double t : {3.0, 6.0}) {
            const double expect = testref::wave_flat_second_moment(1.0, 2.0, t);
            CHECK(std::abs(center_value(m, t) / expect - 1.0) <= 3e-4);
        }
    }
}

TEST_CASE("truncated-stable marching: frozen values, domination, lambda monotonicity") {
    RenewalProblem pb;
    pb.equation = KernelSpec::heat(LevyModel::truncated_stable(1.5));
    pb.lambda = 1.0;
    pb.initial.u0 = Profile::flat(1.0);
    pb.grid = GridSpec{0.125, 0.25, 1.0, 4.0};
    const ForcingField f = forcing_field(pb);
    const MomentField m = solve_second_moment(pb);
    CHECK(center_value(m, 0.5) == doctest::Approx(kTsFlatHalf).epsilon(1e-9));
    CHECK(center_value(m, 1.0) == doctest::Approx(kTsFlatOne).epsilon(1e-9));
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        CHECK(std::isfinite(m.values[i]));
        CHECK(m.values[i] >= f.values[i] - 1e-12); // noise only adds second moment
    }
    pb.lambda = 1.2;
    const MomentField stronger = solve_second_moment(pb);
    for (std::size_t i = 0; i < m.values.size(); ++i)
        CHECK(stronger.values[i] >= m.values[i] - 1e-10);
}

TEST_CASE("overflow rescale: log field is invariant under scaling the start") {
    auto base = heat_problem(1.0, 1.0, Profile::flat(1.0), GridSpec{1.0 / 16, 0.5, 96.0, 12.0});
    const MomentField small = solve_second_moment(base);
    CHECK(small.log_offset == 0.0);

    base.initial.u0 = Profile::flat(1e120);
    const MomentField big = solve_second_moment(base);
    CHECK(big.log_offset > 0.0);
    double stored_peak = 0.0;
    for (double v : big.values) stored_peak = std::max(stored_peak, v);
    CHECK(stored_peak <= 1e251); // rescale keeps every stored slice in range

    const std::size_t n_x = small.xs.size();
    const double shift = 240.0 * std::log(10.0); // log of the start-value ratio squared
    double worst = 0.0;
    for (std::size_t k = 1; k < small.times.size(); ++k) {
        const double l1 = std::log(small.values[k * n_x + n_x / 2]) + small.log_offset;
        const double l2 = std::log(big.values[k * n_x + n_x / 2]) + big.log_offset - shift;
        worst = std::max(worst, std::abs(l1 - l2));
    }
    CHECK(worst <= 1e-6);

    // and the reconstructed log value still tracks the closed form
    const double lT = std::log(big.values[(small.times.size() - 1) * n_x + n_x / 2]) + big.log_offset;
    const double closed = shift + std::log(testref::heat_flat_second_moment(1.0, 1.0, 96.0));
    CHECK(std::abs(lT - closed) <= 1.5);
}

TEST_CASE("growth rate wrapper reads the trailing log slope") {
    MomentField f;
    f.nu = 2;
    f.source = FieldSource::Oracle;
    f.n_paths = 0;
    for (int k = 0; k <= 16; ++k) f.times.push_back(0.125 * k);
    f.xs = {0.0};
    for (double t : f.times) {
        f.values.push_back(std::exp(2.0 * t));
        f.ses.push_back(0.0);
    }
    CHECK(growth_rate(f, 0.5) == doctest::Approx(2.0).epsilon(1e-10));
}
