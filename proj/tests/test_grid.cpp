#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "hjdg/grid.hpp"
#include "hjdg/grid_io.hpp"

using namespace hjdg;

namespace {

SpaceTimeGrid<double> grid1d(int cells, double h, double dt, double t0, double t1) {
    return SpaceTimeGrid<double>::centered_cube(1, cells, h, dt, t0, t1);
}

GridField<double> sample1d(const SpaceTimeGrid<double>& g, double (*fn)(double, double)) {
    return GridField<double>::from_function(g, [&](double t, const VectorX<double>& x) {
        return fn(t, x[0]);
    });
}

}  // namespace

TEST_CASE("grid invariants are enforced") {
    CHECK_THROWS_AS(grid1d(3, 0.1, 0.1, 0.0, 1.0), std::invalid_argument);      // < 4 cells
    CHECK_THROWS_AS(grid1d(8, 0.1, 0.3, 0.0, 1.0), std::invalid_argument);      // dt not a divisor
    CHECK_THROWS_AS(grid1d(8, 0.1, 0.1, 1.0, 0.0), std::invalid_argument);      // reversed times
    const auto g = grid1d(8, 0.25, 0.125, -1.0, 0.0);
    CHECK(g.time_steps() == 8);
    CHECK(g.num_slices() == 9);
    CHECK(g.cells_total() == 8);
    CHECK(g.coord(0, 0) == doctest::Approx(-1.0 + 0.125));
    CHECK(g.domain_low(0) == doctest::Approx(-1.0));
    CHECK(g.domain_high(0) == doctest::Approx(1.0));
}

TEST_CASE("multi-index raveling round-trips in 3d") {
    Eigen::ArrayXi cells(3);
    cells << 4, 5, 6;
    const auto g = SpaceTimeGrid<double>::centered(3, cells, 0.1, 0.1, 0.0, 0.1);
    for (Index c = 0; c < g.cells_total(); ++c) CHECK(g.ravel(g.unravel(c)) == c);
    CHECK(g.stride(0) == 30);
    CHECK(g.stride(1) == 6);
    CHECK(g.stride(2) == 1);
}

TEST_CASE("gradient of a constant field vanishes") {
    const auto g = grid1d(16, 0.1, 0.1, 0.0, 0.2);
    const auto u = sample1d(g, [](double, double) { return 7.0; });
    const auto grad = gradient_centered(u, 1);
    CHECK(grad.abs().maxCoeff() == 0.0);
}

TEST_CASE("gradient of 3 x1 is (3, 0) at interior points") {
    Eigen::ArrayXi cells(2);
    cells << 12, 12;
    const auto g = SpaceTimeGrid<double>::centered(2, cells, 0.1, 0.1, 0.0, 0.1);
    const auto u = GridField<double>::from_function(
        g, [](double, const VectorX<double>& x) { return 3.0 * x[0]; });
    const auto grad = gradient_centered(u, 0);
    for (Index c = 0; c < g.cells_total(); ++c) {
        CHECK(grad(c, 0) == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(grad(c, 1) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("centered difference is exact on quadratics at x = 0.5") {
    // u = x^2 at x = 0.5 with h = 0.1: (0.36 - 0.16) / 0.2 = 1 exactly
    const auto g = SpaceTimeGrid<double>::make(1, Eigen::ArrayXi::Constant(1, 10), 0.1, 0.1, 0.0,
                                               0.1, VectorX<double>::Constant(1, -0.05));
    const auto u = sample1d(g, [](double, double x) { return x * x; });
    // cell centers are 0, 0.1, ..., 0.9; x = 0.5 is cell 5
    CHECK(g.coord(0, 5) == doctest::Approx(0.5));
    const auto grad = gradient_centered(u, 0);
    CHECK(grad(5, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("gradient is exact on affine fields at interior points") {
    Eigen::ArrayXi cells(2);
    cells << 10, 8;
    const auto g = SpaceTimeGrid<double>::centered(2, cells, 0.05, 0.1, 0.0, 0.1);
    const auto u = GridField<double>::from_function(
        g, [](double, const VectorX<double>& x) { return 2.5 * x[0] - 1.25 * x[1] + 0.3; });
    const auto grad = gradient_centered(u, 0);
    for (Index c = 0; c < g.cells_total(); ++c) {
        const auto idx = g.unravel(c);
        if (g.on_boundary_ring(idx)) continue;
        CHECK(grad(c, 0) == doctest::Approx(2.5).epsilon(1e-13));
        CHECK(grad(c, 1) == doctest::Approx(-1.25).epsilon(1e-13));
    }
}

TEST_CASE("integrate_space: measure of B2 in 1d") {
    const auto g = grid1d(256, 5.0 / 256, 0.1, 0.0, 0.1);  // domain [-2.5, 2.5]
    ArrayX<double> ones = ArrayX<double>::Ones(g.cells_total());
    const double got = integrate_space(g, ones, Ball<double>::origin(1, 2.0));
    CHECK(got == doctest::Approx(4.0).epsilon(5.0 / 256 / 4.0 + 1e-12));
    ArrayX<double> zeros = ArrayX<double>::Zero(g.cells_total());
    CHECK(integrate_space(g, zeros, Ball<double>::origin(1, 2.0)) == 0.0);
}

TEST_CASE("integrate_space converges to the analytic integral of x^2 over B1") {
    // int_{-1}^{1} x^2 dx = 2/3; midpoint error is O(h^2)
    double prev_err = 1.0;
    for (int cells : {64, 128, 256, 512}) {
        const double h = 2.5 / cells;
        const auto g = grid1d(cells, h, 0.1, 0.0, 0.1);
        ArrayX<double> v(g.cells_total());
        for (Index c = 0; c < g.cells_total(); ++c) {
            const double x = g.coord(0, int(c));
            v[c] = x * x;
        }
        const double got = integrate_space(g, v, Ball<double>::origin(1, 1.0));
        const double err = std::abs(got - 2.0 / 3.0);
        CHECK(err < 2.0 * h);  // boundary cells dominate: O(h) worst case
        prev_err = err;
    }
    (void)prev_err;
}

TEST_CASE("integrate_spacetime: unit integrand over Q2_bar in 1d") {
    const double h = 1.0 / 64, dt = 1.0 / 64;
    const auto g = grid1d(320, h, dt, -2.0, 0.0);  // domain [-2.5, 2.5]
    const auto u = sample1d(g, [](double, double) { return 1.0; });
    const double got = integrate_spacetime(u, ParabolicCylinder<double>::q2_bar(1));
    CHECK(got == doctest::Approx(8.0).epsilon(4.0 * (h + dt) / 8.0));
    const auto z = sample1d(g, [](double, double) { return 0.0; });
    CHECK(integrate_spacetime(z, ParabolicCylinder<double>::q2_bar(1)) == 0.0);
}

TEST_CASE("integrate_spacetime: g(t,x) = t over Q1 in 1d") {
    const double h = 1.0 / 128, dt = 1.0 / 128;
    const auto g = grid1d(320, h, dt, -1.5, 0.0);
    const auto u = sample1d(g, [](double t, double) { return t; });
    const double got = integrate_spacetime(u, ParabolicCylinder<double>::q1(1));
    CHECK(got == doctest::Approx(-1.0).epsilon(3.0 * (h + dt)));
}

TEST_CASE("integrate_spacetime is linear to 1e-12 relative") {
    const auto g = grid1d(96, 1.0 / 24, 1.0 / 16, -2.0, 0.0);
    const auto u1 = sample1d(g, [](double t, double x) { return std::sin(3 * x) + t; });
    const auto u2 = sample1d(g, [](double t, double x) { return std::cos(2 * x) * (1 + t * t); });
    const auto cyl = ParabolicCylinder<double>::q1(1);
    const double a = 2.75, b = -1.5;
    GridField<double> combo = u1;
    combo.values = a * u1.values + b * u2.values;
    const double lhs = integrate_spacetime(combo, cyl);
    const double rhs = a * integrate_spacetime(u1, cyl) + b * integrate_spacetime(u2, cyl);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("nesting monotonicity for nonnegative integrands") {
    const auto g = grid1d(128, 1.0 / 32, 1.0 / 16, -2.0, 0.0);
    const auto u = sample1d(g, [](double t, double x) { return x * x + t * t + 0.1; });
    const auto inner = ParabolicCylinder<double>::q1(1);
    const auto outer = ParabolicCylinder<double>::q2_bar(1);
    CHECK(integrate_spacetime(u, inner) <= integrate_spacetime(u, outer));
}

TEST_CASE("sup_inf_on: constants and linear fields") {
    const auto g = grid1d(64, 1.0 / 16, 1.0 / 16, -1.0, 0.0);
    const auto c2 = sample1d(g, [](double, double) { return 2.0; });
    auto [hi, lo] = sup_inf_on(c2, ParabolicCylinder<double>::q1(1));
    CHECK(hi == 2.0);
    CHECK(lo == 2.0);

    const auto lin = sample1d(g, [](double, double x) { return x; });
    auto [hi2, lo2] = sup_inf_on(lin, ParabolicCylinder<double>::q1(1));
    // extreme sampled points are the outermost cell centers inside B1
    CHECK(hi2 == doctest::Approx(1.0 - g.h / 2).epsilon(1e-12));
    CHECK(lo2 == doctest::Approx(-1.0 + g.h / 2).epsilon(1e-12));
}

TEST_CASE("sup_inf_on: dense sampling captures the max of sin(pi x)") {
    const auto g = grid1d(200, 0.01, 0.5, -1.0, 0.0);
    const auto u = sample1d(g, [](double, double x) { return std::sin(std::numbers::pi * x); });
    auto [hi, lo] = sup_inf_on(u, ParabolicCylinder<double>::q1(1));
    CHECK(std::abs(hi - 1.0) < 1e-3);
    (void)lo;
}

TEST_CASE("sup_inf_on throws on an empty intersection") {
    const auto g = grid1d(16, 0.05, 0.1, -1.0, 0.0);  // domain [-0.4, 0.4]
    const auto u = sample1d(g, [](double, double) { return 1.0; });
    const auto far = ParabolicCylinder<double>::make(-1.0, 0.0, 0.1,
                                                     VectorX<double>::Constant(1, 5.0));
    CHECK_THROWS(sup_inf_on(u, far));
}

TEST_CASE("ball membership is strict") {
    // cell centers at +-0.5 h, ...; radius exactly at a center must exclude it
    const auto g = grid1d(8, 0.25, 0.1, 0.0, 0.1);
    const auto b = Ball<double>{0.375, VectorX<double>::Zero(1)};  // centers at 0.125, 0.375...
    const auto cells = cells_in_ball(g, b);
    for (Index c : cells) CHECK(std::abs(g.coord(0, int(c))) < 0.375);
    CHECK(cells.size() == 2);  // only +-0.125
}

TEST_CASE("upwind gradient magnitude: monotone slope vs local minimum") {
    const auto g = grid1d(8, 1.0, 1.0, 0.0, 1.0);
    ArrayX<double> slope(8), vee(8);
    for (int i = 0; i < 8; ++i) {
        slope[i] = 2.0 * i;
        vee[i] = std::abs(i - 3.5);
    }
    const auto s1 = upwind_gradient_sq(g, slope);
    CHECK(s1[4] == doctest::Approx(4.0));  // backward diff +2 counts, forward min(2,0)=0
    const auto s2 = upwind_gradient_sq(g, vee);
    CHECK(s2[3] == 0.0);  // local minimum: both one-sided slopes point away
    CHECK(s2[4] == 0.0);
}

TEST_CASE("interpolation reproduces multilinear fields exactly") {
    Eigen::ArrayXi cells(2);
    cells << 10, 10;
    const auto g = SpaceTimeGrid<double>::centered(2, cells, 0.2, 0.25, 0.0, 1.0);
    const auto u = GridField<double>::from_function(g, [](double t, const VectorX<double>& x) {
        return 0.5 + 2.0 * t - x[0] + 3.0 * x[1] + 0.25 * x[0] * x[1];
    });
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> dx(-0.8, 0.8), dtm(0.05, 0.95);
    for (int k = 0; k < 200; ++k) {
        VectorX<double> x(2);
        x << dx(rng), dx(rng);
        const double t = dtm(rng);
        const double expect = 0.5 + 2.0 * t - x[0] + 3.0 * x[1] + 0.25 * x[0] * x[1];
        CHECK(interpolate(u, t, x) == doctest::Approx(expect).epsilon(1e-12));
    }
    VectorX<double> outside(2);
    outside << 5.0, 0.0;
    CHECK_THROWS(interpolate(u, 0.5, outside));
}

TEST_CASE("resample under the identity map is exact") {
    const auto g = grid1d(32, 0.125, 0.125, -1.0, 0.0);
    const auto u = sample1d(g, [](double t, double x) { return std::sin(x) * (1 + t); });
    const auto v = resample(u, g, AffineMap<double>::identity(1));
    CHECK((v.values - u.values).abs().maxCoeff() < 1e-13);
}

TEST_CASE("checkpoint round-trips bit-exactly") {
    const auto g = grid1d(40, 0.05, 0.025, -0.5, 0.25);
    const auto u = sample1d(g, [](double t, double x) {
        return std::sin(12345.6789 * x) + std::exp(t) / 3.0;
    });
    const std::string path = "test_ckpt_roundtrip.hjdg";
    write_checkpoint(u, path);
    const auto v = read_checkpoint(path);
    REQUIRE(v.values.size() == u.values.size());
    CHECK((v.values == u.values).all());
    CHECK(v.grid.same_layout(u.grid));
    CHECK(v.grid.origin.isApprox(u.grid.origin));
    std::remove(path.c_str());
}

TEST_CASE("checkpoint header carries the advertised fields") {
    const auto g = grid1d(8, 0.25, 0.5, 0.0, 1.0);
    const auto hdr = checkpoint_header(g);
    CHECK(hdr.rfind("HJDG1 n=1 cells=8 h=0.25 dt=0.5 t0=0 t1=1", 0) == 0);
}

TEST_CASE("cylinder measures match the reference boxes") {
    CHECK(ParabolicCylinder<double>::q2_bar(1).measure(1) == doctest::Approx(8.0));
    CHECK(ParabolicCylinder<double>::q2(1).measure(1) == doctest::Approx(16.0));
    CHECK(ParabolicCylinder<double>::q3(1).measure(1) == doctest::Approx(24.0));
    CHECK(ParabolicCylinder<double>::q1(1).measure(1) == doctest::Approx(2.0));
    CHECK(ParabolicCylinder<double>::q2(2).measure(2) ==
          doctest::Approx(4.0 * std::numbers::pi * 4.0));
}

TEST_CASE("float instantiation smoke test") {
    const auto g = SpaceTimeGrid<float>::centered_cube(1, 16, 0.125f, 0.125f, 0.0f, 1.0f);
    const auto u = GridField<float>::from_function(
        g, [](float, const VectorX<float>& x) { return 2.0f * x[0]; });
    const auto grad = gradient_centered(u, 0);
    CHECK(grad(8, 0) == doctest::Approx(2.0f));
}
