// Acceptance checks. `acceptance <k>` runs criterion k (1..9), `acceptance all`
// runs every one. One PASS/FAIL line per criterion; exit 0 iff all ran PASS.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "torswitch/flows.hpp"
#include "torswitch/ibp.hpp"
#include "torswitch/parallel.hpp"
#include "torswitch/pdmp.hpp"
#include "torswitch/rng.hpp"
#include "torswitch/special_flow.hpp"
#include "torswitch/transfer_operator.hpp"

using namespace torswitch;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int worker_count() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char b[64];
    std::snprintf(b, sizeof b, f, v);
    return b;
}

double smooth_h(const Vec2& x) { return 1.0 + 0.5 * std::sin(kTwoPi * x.x1) * std::cos(kTwoPi * x.x2); }
double indicator_h(const Vec2& x) { return wrap_unit(x.x1) < 0.5 ? 1.0 : 0.0; }

DensityGrid perturbed_start(int n) {
    return DensityGrid::from_function(
        n, [](const Vec2& x) { return 1.0 + 0.2 * std::sin(kTwoPi * x.x1) * std::cos(kTwoPi * x.x2); });
}

Vec2 unit_vector(CounterRng& rng) {
    const double th = kTwoPi * rng.uniform();
    return {std::cos(th), std::sin(th)};
}

// relative L2 error of a against b over paired samples
double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num / den);
}

// 1. Constant-pair fixed point.
Outcome c1() {
    const auto t0 = Clock::now();
    const FieldPair c = constant_pair();
    const int n = 64;
    const TransferOperator Q(c.u0, c.u1, QuadratureRule::gauss_laguerre(32, 1.0), n);
    const FixedPointResult r = fixed_point(Q, perturbed_start(n), 1e-6, 50);
    const double dev = max_deviation(r.rho, 1.0);
    const double secs = seconds_since(t0);
    const bool pass = r.converged && r.residual < 1e-6 && r.iterations <= 50 && dev < 1e-3 && secs < 120.0;
    return {pass, "iterations " + std::to_string(r.iterations) + fmt(", residual %.3e < 1e-6", r.residual) +
                      fmt(", max |rho - 1| %.3e < 1e-3", dev) + fmt(", %.1f s < 120 s", secs)};
}

// 2. Transfer identity on the conjugated pair.
Outcome c2() {
    const auto t0 = Clock::now();
    const FieldPair g = conjugated_pair(0.1);
    CounterRng rng = CounterRng::stream(2, 0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const TorusPoint x(rng.uniform(), rng.uniform());
        const double s = 3.0 * rng.uniform(), t = 3.0 * rng.uniform();
        worst = std::max(worst, check_transfer_identity(g.u0, g.u1, x, s, t, unit_vector(rng)));
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-5 && secs < 30.0, fmt("max residual %.3e < 1e-5", worst) + fmt(", %.1f s < 30 s", secs)};
}

// 3. IBP gradient against centred differences of Qh over a grid of points.
Outcome c3() {
    const auto t0 = Clock::now();
    const int threads = worker_count();
    std::string detail;
    bool pass = true;
    {
        // C1 test function, conjugated pair, 10 x 10 cell centres; one rule for both sides
        const FieldPair g = conjugated_pair(0.1);
        CompositeOptions o;
        o.panel_width = 0.25;
        o.points_per_panel = 8;
        o.cutoff = 12.0;
        o.tail_order = 4;
        const QuadratureRule q = QuadratureRule::composite(1.0, o);
        TransferOptions lazy;
        lazy.max_cached_entries = 0;
        const int m = 10;
        const TransferOperator Q(g.u0, g.u1, q, m, lazy);
        const std::function<double(const Vec2&)> h = smooth_h;
        std::vector<double> ibp(2 * m * m), fd(2 * m * m);
        const double d = 1e-4;
        parallel_for(static_cast<std::size_t>(m * m), threads, [&](std::size_t c) {
            const Vec2 x{(c / m + 0.5) / m, (c % m + 0.5) / m};
            const Vec2 gi = ibp_gradient_vector(h, g.u0, g.u1, q, x);
            ibp[2 * c] = gi.x1;
            ibp[2 * c + 1] = gi.x2;
            fd[2 * c] = (Q.apply_at(h, x + Vec2{d, 0.0}) - Q.apply_at(h, x - Vec2{d, 0.0})) / (2 * d);
            fd[2 * c + 1] = (Q.apply_at(h, x + Vec2{0.0, d}) - Q.apply_at(h, x - Vec2{0.0, d})) / (2 * d);
        });
        const double err = rel_l2(ibp, fd);
        pass = pass && err < 1e-2;
        detail += fmt("smooth h (conjugated pair, 10x10): rel L2 %.3e < 1e-2", err);
    }
    {
        // indicator on a 16 x 16 grid, constant pair
        const FieldPair c = constant_pair();
        const int n = 16;
        CompositeOptions o;
        o.panel_width = 1.0 / n;
        o.points_per_panel = 3;
        o.cutoff = 14.0;
        o.tail_order = 4;
        const QuadratureRule q = QuadratureRule::composite(1.0, o);
        const DensityGrid grid = DensityGrid::from_function(n, indicator_h);
        const PeriodicSpline h(grid);
        const TransferOperator Q(c.u0, c.u1, q, n);
        IbpOptions io;
        io.threads = threads;
        const GradientGrids gg = ibp_gradient_grid(grid, c.u0, c.u1, q, io);
        std::vector<double> ibp(2 * n * n), fd(2 * n * n);
        bool finite = true;
        const double d = 1e-4;
        parallel_for(static_cast<std::size_t>(n * n), threads, [&](std::size_t cell) {
            const Vec2 x = grid.cell_center(cell);
            ibp[2 * cell] = gg.d1.values()[cell];
            ibp[2 * cell + 1] = gg.d2.values()[cell];
            fd[2 * cell] = (Q.apply_at(h, x + Vec2{d, 0.0}) - Q.apply_at(h, x - Vec2{d, 0.0})) / (2 * d);
            fd[2 * cell + 1] = (Q.apply_at(h, x + Vec2{0.0, d}) - Q.apply_at(h, x - Vec2{0.0, d})) / (2 * d);
        });
        for (double v : ibp) finite = finite && std::isfinite(v);
        const double err = rel_l2(ibp, fd);
        pass = pass && finite && err < 1e-2;
        detail += std::string("; indicator h (constant pair, 16x16): ") + (finite ? "finite" : "NON-FINITE") +
                  fmt(", rel L2 %.3e < 1e-2", err);
    }
    const double secs = seconds_since(t0);
    pass = pass && secs < 300.0;
    return {pass, detail + fmt("; %.1f s < 300 s", secs)};
}

// Fixed point of Q for `cfg` on an n x n grid against a pooled embedded-chain histogram.
struct CrossMethod {
    double l1 = 0.0;
    FixedPointResult fp;
};

CrossMethod cross_method(const SwitchingConfig& cfg, const QuadratureRule& q, int n, long steps, int threads) {
    TransferOptions to;
    to.threads = threads;
    to.flow = cfg.flow;
    const TransferOperator Q(cfg.fields.u0, cfg.fields.u1, q, n, to);
    CrossMethod out;
    out.fp = fixed_point(Q, perturbed_start(n), 1e-6, 200);
    ChainHistogramOptions ho;
    ho.chains = 8;
    ho.steps_per_chain = steps / ho.chains;
    ho.burn_in = 100;
    ho.threads = threads;
    const DensityGrid hist = chain_histogram(cfg, n, ho);
    out.l1 = l1_distance(hist, out.fp.rho);
    return out;
}

// 4. Monte Carlo against the operator on the conjugated pair.
Outcome c4() {
    const auto t0 = Clock::now();
    SwitchingConfig cfg;
    cfg.fields = conjugated_pair(0.1);
    cfg.law = SwitchingLaw::exponential(1.0);
    cfg.seed = 4;
    CompositeOptions o;
    o.panel_width = 1.0;
    o.points_per_panel = 6;
    o.cutoff = 10.0;
    o.tail_order = 4;
    const CrossMethod r = cross_method(cfg, QuadratureRule::composite(1.0, o), 64, 10'000'000, worker_count());
    const double secs = seconds_since(t0);
    return {r.l1 < 0.05 && r.fp.converged && secs < 900.0,
            fmt("L1(chain histogram, fixed point) %.4f < 0.05", r.l1) +
                fmt(", fixed point residual %.2e", r.fp.residual) + fmt(", %.1f s < 900 s", secs)};
}

// 5. Jacobian determinant bracket and first-partial growth.
Outcome c5() {
    const auto t0 = Clock::now();
    const FieldPair g = conjugated_pair(0.1);
    bool pass = true;
    std::string detail;
    for (int i = 0; i < 2; ++i) {
        const VectorFieldSpec& u = i == 0 ? g.u0 : g.u1;
        double lo = INFINITY, hi = 0.0;
        for (int j = 0; j < 256; ++j)
            for (int k = 0; k < 256; ++k) {
                const double d = u.sigma().jacobian_det({(j + 0.5) / 256, (k + 0.5) / 256});
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
        const double c = hi / lo;
        const JacobianScan s = jacobian_bounds_scan(u, 100, 24, {}, worker_count());
        const bool ok = s.min_det >= (1.0 / c) * 0.95 && s.max_det <= c * 1.05 && s.growth_exponent <= 1.2;
        pass = pass && ok;
        detail += (i ? "; u1: " : "u0: ") + fmt("det in [%.4f, ", s.min_det) + fmt("%.4f] within ", s.max_det) +
                  fmt("[%.4f, ", 0.95 / c) + fmt("%.4f]", 1.05 * c) + fmt(", exponent %.3f <= 1.2", s.growth_exponent);
    }
    const double secs = seconds_since(t0);
    return {pass && secs < 300.0, detail + fmt("; %.1f s < 300 s", secs)};
}

// 6. Smoothing cascade under refinement n = 64 -> 128.
Outcome c6() {
    const auto t0 = Clock::now();
    const FieldPair c = constant_pair();
    const QuadratureRule q_ibp = QuadratureRule::gauss_laguerre(32, 1.0);
    TransferOptions to;
    to.threads = worker_count();
    IbpOptions io;
    io.threads = worker_count();
    double grad_h[2], grad_q[2], hess_q2[2], k_hat[2];
    for (int i = 0; i < 2; ++i) {
        const int n = 64 << i;
        const DensityGrid h = DensityGrid::from_function(n, indicator_h);
        // grid-scale modes advect at ~2 pi (n/2) |u| rad per unit time; panels of 1/n resolve them
        CompositeOptions o;
        o.panel_width = 1.0 / n;
        o.points_per_panel = 3;
        o.cutoff = 14.0;
        o.tail_order = 4;
        const QuadratureRule q = QuadratureRule::composite(1.0, o);
        const std::vector<SmoothingRow> rows = smoothing_profile(h, c, q, 2, to);
        grad_h[i] = rows[0].gradient_l1;
        grad_q[i] = rows[1].gradient_l1;
        hess_q2[i] = rows[2].hessian_l1;
        k_hat[i] = l1_gradient_bound(h, c.u0, c.u1, q_ibp, io).k_hat;
    }
    auto stable = [](const double* v) { return std::max(v[0], v[1]) / std::min(v[0], v[1]) <= 1.5; };
    const double h_ratio = grad_h[1] / grad_h[0];
    // linear divergence in n: doubling n should double the norm
    const bool h_linear = std::abs(h_ratio - 2.0) <= 0.5;
    const bool pass = stable(grad_q) && stable(hess_q2) && stable(k_hat) && h_linear;
    return {pass, fmt("|grad Qh| %.4f", grad_q[0]) + fmt(" -> %.4f", grad_q[1]) +
                      fmt(", |grad^2 Q^2h| %.4f", hess_q2[0]) + fmt(" -> %.4f", hess_q2[1]) +
                      fmt(", K_hat %.4f", k_hat[0]) + fmt(" -> %.4f (each within x1.5)", k_hat[1]) +
                      fmt("; |grad h| %.4f", grad_h[0]) + fmt(" -> %.4f", grad_h[1]) +
                      fmt(", ratio %.3f (linear divergence needs 2 +- 0.5)", h_ratio) +
                      fmt("; %.1f s", seconds_since(t0))};
}

// 7. Special flow.
Outcome c7() {
    const auto t0 = Clock::now();
    const SpecialFlowSpec spec = SpecialFlowSpec::sinusoidal(0.3);
    CounterRng rng = CounterRng::stream(7, 0);
    auto point = [&] {
        SpecialPoint p;
        p.r = rng.uniform();
        p.h = rng.uniform() * spec.roof(p.r);
        return p;
    };
    bool det_exact = true;
    double worst_ratio = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const SpecialPoint p = point();
        const double t = 200.0 * rng.uniform();
        const SpecialStep st = special_step(spec, p, t);
        det_exact = det_exact && shear_from_crossings(spec, st.crossings).det() == 1.0;
        const double bound = (1.0 / spec.h_min()) * (1.0 + t) * 1.05;
        worst_ratio = std::max(worst_ratio, static_cast<double>(st.crossings.size()) / bound);
    }
    const double t = 10.0, d = 1e-7, margin = 1e-4;
    double fd_err = 0.0;
    int used = 0;
    for (int i = 0; i < 2000; ++i) {
        const SpecialPoint p = point();
        if (p.h < margin || spec.roof(p.r) - p.h < margin) continue;
        const SpecialStep base = special_step(spec, p, t);
        if (base.point.h < margin || spec.roof(base.point.r) - base.point.h < margin) continue;
        const Mat2 j = shear_from_crossings(spec, base.crossings);
        const SpecialStep rp = special_step(spec, {wrap_unit(p.r + d), p.h}, t);
        const SpecialStep rm = special_step(spec, {wrap_unit(p.r - d), p.h}, t);
        const SpecialStep hp = special_step(spec, {p.r, p.h + d}, t);
        const SpecialStep hm = special_step(spec, {p.r, p.h - d}, t);
        const Mat2 fd{shortest_offset(rp.point.r - rm.point.r) / (2 * d), shortest_offset(hp.point.r - hm.point.r) / (2 * d),
                      (rp.point.h - rm.point.h) / (2 * d), (hp.point.h - hm.point.h) / (2 * d)};
        fd_err = std::max(fd_err, (fd - j).max_abs());
        ++used;
    }
    const double secs = seconds_since(t0);
    const bool pass = det_exact && fd_err < 1e-5 && worst_ratio <= 1.0 && used > 0 && secs < 60.0;
    return {pass, std::string("det == 1 exactly: ") + (det_exact ? "yes" : "NO") +
                      fmt(" (10^4 samples); shear vs FD max err %.2e < 1e-5", fd_err) + " over " +
                      std::to_string(used) + " points" +
                      fmt("; max n / ((1+t)(1.05)/H_min) = %.3f <= 1", worst_ratio) + fmt("; %.1f s < 60 s", secs)};
}

// 8. Mass preservation and the single-switch factorization.
Outcome c8() {
    const auto t0 = Clock::now();
    const FieldPair c = constant_pair();
    const int n = 64;
    const QuadratureRule q = QuadratureRule::gauss_laguerre(32, 1.0);
    const DensityGrid h = DensityGrid::from_function(n, smooth_h);
    const DensityGrid qh = apply_Q(h, c.u0, c.u1, q);
    const double mass_err = std::abs(qh.mass() - h.mass());
    const DensityGrid split = apply_single_switch(apply_single_switch(h, 1, c, q.s()), 0, c, q.t());
    const double l1 = l1_distance(split, qh);
    const double secs = seconds_since(t0);
    return {mass_err < 1e-4 && l1 < 1e-6,
            fmt("|mass(Qh) - mass(h)| %.2e < 1e-4", mass_err) + fmt(", L1(S0 S1 h, Qh) %.2e < 1e-6", l1) +
                fmt("; %.1f s", secs)};
}

// 9. Gamma(2, 2) switching on the constant pair.
Outcome c9() {
    const auto t0 = Clock::now();
    SwitchingConfig cfg;
    cfg.fields = constant_pair();
    cfg.law = SwitchingLaw::gamma(2.0, 2.0);
    cfg.seed = 9;
    const CrossMethod r = cross_method(cfg, QuadratureRule::gauss_for_law(cfg.law, 32), 64, 10'000'000, worker_count());
    const bool pass = r.fp.converged && r.fp.residual < 1e-6 && r.l1 < 0.05;
    return {pass, fmt("fixed point residual %.3e < 1e-6", r.fp.residual) +
                      " after " + std::to_string(r.fp.iterations) + " iterations" +
                      fmt(", L1(chain histogram, fixed point) %.4f < 0.05", r.l1) + fmt("; %.1f s", seconds_since(t0))};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Outcome()>> criteria = {c1, c2, c3, c4, c5, c6, c7, c8, c9};
    std::vector<int> which;
    if (argc < 2 || std::strcmp(argv[1], "all") == 0) {
        for (int k = 1; k <= 9; ++k) which.push_back(k);
    } else {
        for (int i = 1; i < argc; ++i) {
            const int k = std::atoi(argv[i]);
            if (k < 1 || k > 9) {
                std::fprintf(stderr, "usage: acceptance [all | 1..9 ...]\n");
                return 2;
            }
            which.push_back(k);
        }
    }
    bool all = true;
    for (int k : which) {
        Outcome o;
        try {
            o = criteria[k - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %d: %s  %s\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
