#include <cmath>
#include <random>

#include "doctest.h"
#include "torswitch/errors.hpp"
#include "torswitch/flows.hpp"
#include "torswitch/vector_fields.hpp"

using namespace torswitch;

namespace {

Vec2 random_point(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return {u(gen), u(gen)};
}

VectorFieldSpec sample_trig_field() {
    return VectorFieldSpec::trig({1.0, 0.3}, {TrigTerm{1, 0, {0.1, 0.0}, {0.0, 0.2}},
                                              TrigTerm{1, -2, {0.05, -0.07}, {0.02, 0.0}}});
}

}  // namespace

TEST_CASE("torus points wrap and measure shortest distance") {
    TorusPoint p(1.25, -0.25);
    CHECK(p.x1() == doctest::Approx(0.25));
    CHECK(p.x2() == doctest::Approx(0.75));
    CHECK(TorusPoint(-1e-18, 0.0).x1() == 0.0);
    CHECK(distance(TorusPoint(0.05, 0.05), TorusPoint(0.95, 0.95)) == doctest::Approx(std::sqrt(0.02)));
    CHECK(distance(TorusPoint(0.0, 0.0), TorusPoint(0.5, 0.5)) <= std::sqrt(2.0) / 2 + 1e-15);
}

TEST_CASE("constant pair drive matrix") {
    const FieldPair p = constant_pair();
    for (Vec2 x : {Vec2{0.1, 0.2}, Vec2{0.9, 0.4}}) {
        const DriveMatrix d = eval_drive_matrix(p.u0, p.u1, x);
        CHECK(d.det == doctest::Approx(-(1.0 + kAlpha * kBeta)).epsilon(1e-15));
        CHECK(d.U.col(0).x1 == -kBeta);
        CHECK(d.U.col(1).x2 == kAlpha);
        const Mat2 I = d.U * d.inverse;
        CHECK(std::abs(I.a11 - 1) + std::abs(I.a12) + std::abs(I.a21) + std::abs(I.a22 - 1) < 1e-15);
    }
}

TEST_CASE("parallel fields are singular") {
    const auto e = VectorFieldSpec::constant({1.0, 0.0});
    CHECK_THROWS_AS(eval_drive_matrix(e, e, Vec2{0.3, 0.3}), SingularMatrixError);
    const TransversalityReport r = check_transversality(e, e, 32);
    CHECK_FALSE(r.pass);
    CHECK(r.min_abs_det == 0.0);
}

TEST_CASE("transversality scan") {
    const FieldPair c = constant_pair();
    const TransversalityReport r = check_transversality(c.u0, c.u1, 64);
    CHECK(r.pass);
    CHECK(r.min_abs_det == doctest::Approx(1.0 + kAlpha * kBeta).epsilon(1e-15));
    CHECK_THROWS(check_transversality(c.u0, c.u1, 8));

    const Vec2 v{0.3, 0.7};
    const auto rot = VectorFieldSpec::constant({-v.x2, v.x1});
    const TransversalityReport o = check_transversality(VectorFieldSpec::constant(v), rot, 16);
    CHECK(o.pass);
    CHECK(o.min_abs_det == doctest::Approx(dot(v, v)));

    const FieldPair g = conjugated_pair(0.1);
    CHECK(check_transversality(g.u0, g.u1, 64).pass);

    // strong one-sided shear: sigma is still a diffeomorphism, the pair is not transversal
    const DiffeoSpec shear(0.45, {1.0, 0.0});
    const auto w0 = make_conjugated_field({1.0, kAlpha}, shear);
    const auto w1 = VectorFieldSpec::constant({-kBeta, 1.0});
    // det U changes sign, so a fine grid lands close to the zero set
    const TransversalityReport bad = check_transversality(w0, w1, 1024, 1e-2);
    CHECK_FALSE(bad.pass);
    CHECK(bad.min_abs_det < 1e-2);
}

TEST_CASE("identity conjugacy reduces to the base") {
    const auto u = make_conjugated_field({1.0, kAlpha}, DiffeoSpec::identity());
    const Vec2 v = u.eval(Vec2{0.37, 0.81});
    CHECK(v.x1 == 1.0);
    CHECK(v.x2 == kAlpha);
    const FieldPair c = constant_pair();
    const DriveMatrix d = eval_drive_matrix(u, c.u1, Vec2{0.2, 0.2});
    CHECK(d.det == doctest::Approx(-(1.0 + kAlpha * kBeta)));
}

TEST_CASE("diffeomorphism inverse round trip") {
    std::mt19937_64 gen(1);
    const DiffeoSpec s(0.1, {1.0, 1.0}, {0.25, 0.25});
    CHECK(s.is_valid());
    CHECK(s.bound() == doctest::Approx(1.0 / kTwoPi));
    for (int i = 0; i < 100; ++i) {
        const Vec2 x = random_point(gen);
        const Vec2 back = s.inverse(s.forward(x));
        CHECK(norm(back - x) < 1e-12);
        CHECK(s.jacobian_det(x) > 0.0);
    }
    const DiffeoSpec near(0.155);
    const Vec2 x{0.01, 0.49};
    CHECK(norm(near.inverse(near.forward(x)) - x) < 1e-12);
    CHECK_FALSE(DiffeoSpec(0.2).is_valid());
    CHECK_THROWS_AS(make_conjugated_field({1.0, kAlpha}, DiffeoSpec(0.2)), DiffeoInversionError);
}

TEST_CASE("jacobian matches centered differences of eval") {
    std::mt19937_64 gen(2);
    const FieldPair g = conjugated_pair(0.1);
    const VectorFieldSpec fields[] = {g.u0, g.u1, sample_trig_field(), VectorFieldSpec::constant({0.4, 1.0})};
    const double h = 1e-5;
    for (const auto& f : fields) {
        for (int i = 0; i < 100; ++i) {
            const Vec2 x = random_point(gen);
            const Mat2 J = f.jacobian(x);
            const Vec2 d1 = (f.eval(x + Vec2{h, 0}) - f.eval(x - Vec2{h, 0})) * (0.5 / h);
            const Vec2 d2 = (f.eval(x + Vec2{0, h}) - f.eval(x - Vec2{0, h})) * (0.5 / h);
            const Mat2 fd = Mat2::from_columns(d1, d2);
            const double scale = std::max(1.0, J.max_abs());
            CHECK((J - fd).max_abs() / scale < 1e-6);
            const auto [v, J2] = f.eval_and_jacobian(x);
            CHECK(norm(v - f.eval(x)) < 1e-15);
            CHECK((J2 - J).max_abs() < 1e-14);
        }
    }
}

TEST_CASE("higher partials are consistent with lower ones") {
    std::mt19937_64 gen(3);
    const FieldPair g = conjugated_pair(0.1);
    const VectorFieldSpec fields[] = {g.u0, g.u1, sample_trig_field()};
    const double h = 1e-4;
    for (const auto& f : fields) {
        for (int i = 0; i < 20; ++i) {
            const Vec2 x = random_point(gen);
            CHECK(norm(f.partial(x, 0, 0) - f.eval(x)) < 1e-14);
            CHECK(norm(f.partial(x, 1, 0) - f.jacobian(x).col(0)) < 1e-12);
            for (int n1 = 0; n1 <= 3; ++n1)
                for (int n2 = 0; n1 + n2 <= 3; ++n2) {
                    const Vec2 up = (f.partial(x + Vec2{h, 0}, n1, n2) - f.partial(x - Vec2{h, 0}, n1, n2)) *
                                    (0.5 / h);
                    const Vec2 an = f.partial(x, n1 + 1, n2);
                    CHECK(norm(up - an) < 1e-4 * std::max(1.0, norm(an)));
                }
            const Vec2 dg = f.divergence_gradient(x);
            const double fd1 = (f.divergence(x + Vec2{h, 0}) - f.divergence(x - Vec2{h, 0})) * (0.5 / h);
            const double fd2 = (f.divergence(x + Vec2{0, h}) - f.divergence(x - Vec2{0, h})) * (0.5 / h);
            CHECK(dg.x1 == doctest::Approx(fd1).epsilon(1e-5).scale(1.0));
            CHECK(dg.x2 == doctest::Approx(fd2).epsilon(1e-5).scale(1.0));
        }
    }
    CHECK_THROWS(g.u0.partial(Vec2{0.1, 0.1}, 3, 2));
}

TEST_CASE("conjugated field satisfies the conjugacy relation") {
    std::mt19937_64 gen(4);
    const Vec2 base{1.0, kAlpha};
    const DiffeoSpec s(0.1, {1.0, 1.0}, {0.0, 0.0});
    const auto u = make_conjugated_field(base, s);
    const double h = 1e-5;
    for (int i = 0; i < 100; ++i) {
        const Vec2 x = random_point(gen);
        CHECK(norm(s.jacobian(x) * u.eval(x) - base) < 1e-10);
        // div(rho u) = 0 for rho = det D sigma
        const auto rho_u = [&](const Vec2& y) { return s.jacobian_det(y) * u.eval(y); };
        const double div = ((rho_u(x + Vec2{h, 0}) - rho_u(x - Vec2{h, 0})).x1 +
                            (rho_u(x + Vec2{0, h}) - rho_u(x - Vec2{0, h})).x2) * (0.5 / h);
        CHECK(std::abs(div) < 1e-6);
        const Vec2 gd = s.jacobian_det_gradient(x);
        const double an = dot(gd, u.eval(x)) + s.jacobian_det(x) * u.divergence(x);
        CHECK(std::abs(an) < 1e-12);
    }
}

TEST_CASE("conjugated flow is a straight line through sigma") {
    std::mt19937_64 gen(5);
    const Vec2 base{1.0, kAlpha};
    const DiffeoSpec s(0.1, {1.0, 1.0}, {0.0, 0.0});
    const auto u = make_conjugated_field(base, s);
    for (int i = 0; i < 10; ++i) {
        const Vec2 x = random_point(gen);
        const FlowResult r = flow_lifted(u, x, 10.0, FlowOptions{2.5e-3});
        const Vec2 expect = s.forward(x) + 10.0 * base;
        CHECK(norm(s.forward(r.lift) - expect) < 1e-8);
    }
}
