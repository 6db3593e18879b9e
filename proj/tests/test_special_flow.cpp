#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "torswitch/errors.hpp"
#include "torswitch/rng.hpp"
#include "torswitch/special_flow.hpp"
#include "torswitch/torus.hpp"

using namespace torswitch;

namespace {

const double kAlpha = (std::sqrt(5.0) - 1.0) / 2.0;

SpecialPoint random_point(const SpecialFlowSpec& spec, CounterRng& rng) {
    SpecialPoint p;
    p.r = rng.uniform();
    p.h = rng.uniform() * spec.roof(p.r);
    return p;
}

}  // namespace

TEST_CASE("flat roof: unit-time returns rotate by omega") {
    const SpecialFlowSpec spec(kAlpha, "golden", 1.0, {});
    const SpecialStep st = special_step(spec, {0.0, 0.0}, 5.5);
    REQUIRE(st.crossings.size() == 5);
    CHECK(std::abs(shortest_offset(st.point.r - std::fmod(5 * kAlpha, 1.0))) < 1e-12);
    CHECK(st.point.h == doctest::Approx(0.5).epsilon(1e-12));
    for (int k = 0; k < 5; ++k)
        CHECK(std::abs(shortest_offset(st.crossings[k] - k * kAlpha)) < 1e-12);
    const Mat2 d = shear_from_crossings(spec, st.crossings);
    CHECK(d.a21 == 0.0);
}

TEST_CASE("t = 0 is the identity and the roof hit jumps") {
    const SpecialFlowSpec spec = SpecialFlowSpec::sinusoidal(0.3);
    const SpecialPoint p{0.37, 0.2};
    const SpecialStep st = special_step(spec, p, 0.0);
    CHECK(st.crossings.empty());
    CHECK(st.point.r == p.r);
    CHECK(st.point.h == p.h);
    const Mat2 d = shear_jacobian(spec, p, 0.0);
    CHECK(d.a11 == 1.0);
    CHECK(d.a21 == 0.0);
    const SpecialStep hit = special_step(spec, p, spec.roof(p.r) - p.h);
    REQUIRE(hit.crossings.size() == 1);
    CHECK(hit.point.h == 0.0);
    CHECK(std::abs(shortest_offset(hit.point.r - p.r - spec.omega())) < 1e-15);
}

TEST_CASE("invalid inputs") {
    CHECK_THROWS_AS(SpecialFlowSpec(kAlpha, "golden", 1.0, {{1, 1.2, 0.0}}), ConfigError);
    CHECK_THROWS_AS(SpecialFlowSpec(1.5, "x", 1.0, {}), ConfigError);
    CHECK_THROWS_AS(SpecialFlowSpec(kAlpha, "golden", 1.0, {{0, 0.1, 0.0}}), ConfigError);
    const SpecialFlowSpec spec = SpecialFlowSpec::sinusoidal(0.3);
    CHECK_THROWS_AS(special_step(spec, {0.25, 1.31}, 1.0), std::domain_error);
    CHECK_THROWS_AS(special_step(spec, {0.25, 0.1}, -1.0), std::domain_error);
    CHECK(spec.h_min() == doctest::Approx(0.7).epsilon(1e-6));
    CHECK(spec.h_max() == doctest::Approx(1.3).epsilon(1e-6));
}

TEST_CASE("semigroup") {
    const SpecialFlowSpec spec(kAlpha, "golden", 1.0, {{1, 0.3, 0.0}, {3, 0.1, 1.0}});
    CounterRng rng = CounterRng::stream(11, 0);
    for (int i = 0; i < 200; ++i) {
        const SpecialPoint p = random_point(spec, rng);
        const double t1 = 10.0 * rng.uniform(), t2 = 10.0 * rng.uniform();
        const SpecialStep a = special_step(spec, p, t1);
        const SpecialStep b = special_step(spec, a.point, t2);
        const SpecialStep c = special_step(spec, p, t1 + t2);
        // a crossing landing exactly on a split point can flip the count by rounding
        if (std::abs(c.point.h) < 1e-9 || std::abs(spec.roof(c.point.r) - c.point.h) < 1e-9) continue;
        REQUIRE(a.crossings.size() + b.crossings.size() == c.crossings.size());
        CHECK(std::abs(shortest_offset(b.point.r - c.point.r)) < 1e-12);
        CHECK(std::abs(b.point.h - c.point.h) < 1e-12);
        const Mat2 prod = shear_from_crossings(spec, b.crossings) * shear_from_crossings(spec, a.crossings);
        const Mat2 whole = shear_from_crossings(spec, c.crossings);
        CHECK(std::abs(prod.a21 - whole.a21) < 1e-12);
    }
}

TEST_CASE("shear matches finite differences away from crossings") {
    const SpecialFlowSpec spec(kAlpha, "golden", 1.0, {{1, 0.3, 0.0}, {2, 0.05, 0.4}});
    CounterRng rng = CounterRng::stream(3, 0);
    const double t = 10.0, d = 1e-7, margin = 1e-4;
    int checked = 0;
    for (int i = 0; i < 500; ++i) {
        const SpecialPoint p = random_point(spec, rng);
        if (p.h < margin || spec.roof(p.r) - p.h < margin) continue;
        const SpecialStep base = special_step(spec, p, t);
        if (base.point.h < margin || spec.roof(base.point.r) - base.point.h < margin) continue;
        const Mat2 j = shear_from_crossings(spec, base.crossings);
        const SpecialStep rp = special_step(spec, {wrap_unit(p.r + d), p.h}, t);
        const SpecialStep rm = special_step(spec, {wrap_unit(p.r - d), p.h}, t);
        const SpecialStep hp = special_step(spec, {p.r, p.h + d}, t);
        const SpecialStep hm = special_step(spec, {p.r, p.h - d}, t);
        REQUIRE(rp.crossings.size() == base.crossings.size());
        REQUIRE(hm.crossings.size() == base.crossings.size());
        const double drr = shortest_offset(rp.point.r - rm.point.r) / (2 * d);
        const double dhr = (rp.point.h - rm.point.h) / (2 * d);
        const double drh = shortest_offset(hp.point.r - hm.point.r) / (2 * d);
        const double dhh = (hp.point.h - hm.point.h) / (2 * d);
        CHECK(std::abs(drr - j.a11) < 1e-5);
        CHECK(std::abs(drh - j.a12) < 1e-5);
        CHECK(std::abs(dhr - j.a21) < 1e-5);
        CHECK(std::abs(dhh - j.a22) < 1e-5);
        CHECK(j.det() == 1.0);
        ++checked;
    }
    CHECK(checked > 400);
}

TEST_CASE("crossing counts sit between t/H_max - 1 and t/H_min + 1") {
    const SpecialFlowSpec spec = SpecialFlowSpec::sinusoidal(0.3);
    CounterRng rng = CounterRng::stream(5, 0);
    for (int i = 0; i < 100; ++i) {
        const SpecialPoint p = random_point(spec, rng);
        const double t = 200.0 * rng.uniform();
        const double n = static_cast<double>(special_step(spec, p, t).crossings.size());
        CHECK(n <= t / spec.h_min() + 1.0);
        CHECK(n >= t / spec.h_max() - 1.0);
    }
}

TEST_CASE("growth report: shear stays sub-linear and scales with the amplitude") {
    const SpecialFlowSpec spec = SpecialFlowSpec::sinusoidal(0.2);
    const GrowthReport a = growth_report(spec, 200, 64, 9);
    REQUIRE(a.rows.size() == 200);
    CHECK(a.fitted_exponent <= 1.1);
    const GrowthReport b = growth_report(spec.scaled(2.0), 200, 64, 9);
    double ma = 0.0, mb = 0.0;
    for (const GrowthRow& r : a.rows) ma = std::max(ma, r.max_shear);
    for (const GrowthRow& r : b.rows) mb = std::max(mb, r.max_shear);
    MESSAGE("max shear " << ma << " doubled " << mb << " exponent " << a.fitted_exponent);
    CHECK(mb <= 2.0 * 1.05 * ma);
    const std::string csv = growth_report_csv(a);
    CHECK(csv.rfind("t,max_shear,fitted_exponent\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 201);
}
