#include <cmath>
#include <complex>

#include "doctest.h"
#include "torswitch/errors.hpp"
#include "torswitch/quadrature.hpp"
#include "torswitch/switching_law.hpp"

using namespace torswitch;

namespace {

double factorial(int k) { return std::tgamma(k + 1.0); }

// E[cos(w S)] for S ~ exp(lambda)
double exp_cos_oracle(double lambda, double w) { return lambda * lambda / (lambda * lambda + w * w); }

double rule_cos(const Rule1D& r, double w) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::cos(w * r.nodes[i]);
    return s;
}

}  // namespace

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
    const Rule1D r = gauss_legendre(8);
    for (int k = 0; k <= 15; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
        const double exact = (k % 2) ? 0.0 : 2.0 / (k + 1);
        CHECK(s == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
    }
}

TEST_CASE("Gauss-Laguerre rule for the exponential law") {
    for (double lambda : {1.0, 2.5}) {
        const QuadratureRule q = QuadratureRule::gauss_laguerre(32, lambda);
        CHECK(q.s().size() == 32);
        CHECK(std::abs(q.total_weight() - 1.0) < 1e-12);
        // exact for degree <= 63; check moments E[S^k] = k!/lambda^k
        for (int k = 0; k <= 20; ++k) {
            double m = 0.0;
            for (std::size_t i = 0; i < q.s().size(); ++i) m += q.s().weights[i] * std::pow(q.s().nodes[i], k);
            CHECK(m == doctest::Approx(factorial(k) / std::pow(lambda, k)).epsilon(1e-10));
        }
        double w2 = 0.0;
        for (std::size_t i = 0; i < q.s().size(); ++i)
            for (std::size_t j = 0; j < q.t().size(); ++j) w2 += q.weight(i, j);
        CHECK(std::abs(w2 - 1.0) < 1e-12);
    }
}

TEST_CASE("generalized Gauss-Laguerre for a gamma law") {
    const SwitchingLaw g = SwitchingLaw::gamma(2.0, 2.0);
    const QuadratureRule q = QuadratureRule::gauss_for_law(g, 32);
    CHECK(std::abs(q.total_weight() - 1.0) < 1e-12);
    CHECK_FALSE(q.exponential_law());
    for (int k = 0; k <= 12; ++k) {
        double m = 0.0;
        for (std::size_t i = 0; i < q.s().size(); ++i) m += q.s().weights[i] * std::pow(q.s().nodes[i], k);
        // E[S^k] = Gamma(k + 2) / (Gamma(2) 2^k)
        CHECK(m == doctest::Approx(std::tgamma(k + 2.0) / std::pow(2.0, k)).epsilon(1e-10));
    }
}

TEST_CASE("composite rule resolves oscillatory integrands") {
    const double lambda = 1.0;
    const QuadratureRule c = QuadratureRule::composite(lambda);
    const QuadratureRule g = QuadratureRule::gauss_laguerre(32, lambda);
    CHECK(std::abs(c.s().weight_sum() - 1.0) < 1e-12);
    for (double w : {1.0, 2.0 * 3.14159265358979 * 1.618, 2.0 * 3.14159265358979 * 2.5}) {
        // the Laguerre tail cannot follow the oscillation; it carries e^-16 of the mass
        CHECK(std::abs(rule_cos(c.s(), w) - exp_cos_oracle(lambda, w)) < 1.2e-7);
    }
    CompositeOptions longer;
    longer.cutoff = 24.0;
    const QuadratureRule c24 = QuadratureRule::composite(lambda, longer);
    CHECK(std::abs(rule_cos(c24.s(), 10.0) - exp_cos_oracle(lambda, 10.0)) < 1e-10);
    // a single Laguerre rule cannot integrate a frequency-1 mode
    const double w = 2.0 * 3.14159265358979323846;
    CHECK(std::abs(rule_cos(g.s(), w) - exp_cos_oracle(lambda, w)) > 1e-2);
}

TEST_CASE("composite rule for a gamma law") {
    const SwitchingLaw g = SwitchingLaw::gamma(2.0, 2.0);
    const QuadratureRule c = QuadratureRule::composite_for_law(g);
    CHECK(std::abs(c.s().weight_sum() - 1.0) < 1e-12);
    // E[cos(w S)] for Gamma(2, 2) = Re (2 / (2 - i w))^2
    const double w = 5.0;
    const std::complex<double> phi = std::pow(std::complex<double>(2.0, 0.0) / std::complex<double>(2.0, -w), 2);
    CHECK(std::abs(rule_cos(c.s(), w) - phi.real()) < 1e-9);
}

TEST_CASE("pruning keeps the total weight") {
    const QuadratureRule g = QuadratureRule::gauss_laguerre(32, 1.0);
    const QuadratureRule p = g.pruned(1e-16);
    CHECK(p.s().size() < g.s().size());
    CHECK(std::abs(p.total_weight() - 1.0) < 1e-12);
    CHECK_THROWS(g.pruned(10.0));
}
