#include <cmath>
#include <random>

#include "doctest.h"
#include "torswitch/density_grid.hpp"
#include "torswitch/errors.hpp"

using namespace torswitch;

namespace {
constexpr double kTau = 6.283185307179586;
}

TEST_CASE("grid layout and mass") {
    DensityGrid g(4);
    g(1, 2) = 16.0;
    CHECK(g.values()[1 * 4 + 2] == 16.0);
    CHECK(g.mass() == 1.0);
    CHECK(g.cell_center(1, 2).x1 == 0.375);
    CHECK(g.cell_center(6).x2 == 0.625);
    CHECK(g.wrapped(-3, 6) == 16.0);
    g *= 3.0;
    g.normalize();
    CHECK(g.mass() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(DensityGrid(4).normalize(), NumericalError);
    CHECK(l1_distance(DensityGrid::uniform(8), DensityGrid(8, 0.5)) == 0.5);
}

TEST_CASE("spline interpolates the cell values") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DensityGrid g(16);
    for (double& v : g.values()) v = u(gen);
    const PeriodicSpline sp(g);
    for (int j = 0; j < 16; ++j)
        for (int k = 0; k < 16; ++k) CHECK(std::abs(sp(g.cell_center(j, k)) - g(j, k)) < 1e-13);
    // periodic in both directions
    CHECK(std::abs(sp(Vec2{0.3, 0.7}) - sp(Vec2{-2.7, 3.7})) < 1e-12);
}

TEST_CASE("spline accuracy on smooth data") {
    const int n = 64;
    auto f = [](const Vec2& x) { return 1.0 + 0.5 * std::sin(kTau * x.x1) * std::cos(kTau * x.x2); };
    const DensityGrid g = DensityGrid::from_function(n, f);
    const PeriodicSpline sp(g);
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const Vec2 x{u(gen), u(gen)};
        CHECK(std::abs(sp(x) - f(x)) < 1e-6);
        const Vec2 gr = sp.gradient(x);
        const double d1 = 0.5 * kTau * std::cos(kTau * x.x1) * std::cos(kTau * x.x2);
        const double d2 = -0.5 * kTau * std::sin(kTau * x.x1) * std::sin(kTau * x.x2);
        CHECK(std::abs(gr.x1 - d1) < 1e-4);
        CHECK(std::abs(gr.x2 - d2) < 1e-4);
    }
}

TEST_CASE("derivative norms") {
    CHECK(gradient_l1(DensityGrid::uniform(32)) == 0.0);
    CHECK(hessian_l1(DensityGrid::uniform(32)) == 0.0);
    auto indicator = [](const Vec2& x) { return x.x1 < 0.5 ? 1.0 : 0.0; };
    // total variation of the indicator is 2 at every resolution; second differences grow like n
    const DensityGrid a = DensityGrid::from_function(64, indicator);
    const DensityGrid b = DensityGrid::from_function(128, indicator);
    CHECK(gradient_l1(a) == doctest::Approx(2.0));
    CHECK(gradient_l1(b) == doctest::Approx(2.0));
    CHECK(hessian_l1(b) / hessian_l1(a) == doctest::Approx(2.0));

    // smooth function: ||grad f||_L1 of sin(2 pi x1) is 4
    const DensityGrid s = DensityGrid::from_function(256, [](const Vec2& x) { return std::sin(kTau * x.x1); });
    CHECK(gradient_l1(s) == doctest::Approx(4.0).epsilon(1e-3));
    const DensityGrid d1 = grid_partial(s, 0), d2 = grid_partial(s, 1);
    CHECK(direction_sup_l1(d1, d2) == doctest::Approx(4.0).epsilon(1e-3));
    CHECK(hessian_l1(s) == doctest::Approx(4.0 * kTau).epsilon(1e-3));  // (2 pi)^2 * 2/pi
}

TEST_CASE("resampling preserves smooth functions") {
    auto f = [](const Vec2& x) { return 2.0 + std::cos(kTau * (x.x1 + 2 * x.x2)); };
    const DensityGrid a = DensityGrid::from_function(64, f);
    const DensityGrid b = resample(a, 128);
    CHECK(l1_distance(b, DensityGrid::from_function(128, f)) < 1e-5);
}
