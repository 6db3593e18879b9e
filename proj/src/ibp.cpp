#include "torswitch/ibp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "torswitch/errors.hpp"
#include "torswitch/node_sweep.hpp"
#include "torswitch/parallel.hpp"
#include "torswitch/rng.hpp"

namespace torswitch {

namespace {

Mat2 drive_inverse(const Vec2& u1y, const Vec2& u0y, const Vec2& y) {
    const Mat2 U = Mat2::from_columns(u1y, u0y);
    if (std::fabs(U.det()) < kSingularDetThreshold) {
        std::ostringstream os;
        os << "U singular at " << y << " (det " << U.det() << ")";
        throw SingularMatrixError(os.str());
    }
    return U.inverse();
}

// At y = Psi_0^t x with F0 = F_0^t(x):
//   tau = -U^{-1} F0,  d_t tau = U^{-1} (d_t U) U^{-1} F0 + U^{-1} Du0 F0,
//   d_t U = (-Du1 u0, -Du0 u0).
struct TauAt {
    Mat2 tau;
    Mat2 dtau;
    Vec2 u0y;
    double div0y = 0.0;
};

TauAt tau_at(const VectorFieldSpec& u0, const VectorFieldSpec& u1, const Vec2& y, const Mat2& F0) {
    const auto [a, Da] = u0.eval_and_jacobian(y);
    const auto [b, Db] = u1.eval_and_jacobian(y);
    const Mat2 Ui = drive_inverse(b, a, y);
    const Mat2 dU = Mat2::from_columns(-1.0 * (Db * a), -1.0 * (Da * a));
    const Mat2 UiF = Ui * F0;
    return {-1.0 * UiF, Ui * dU * UiF + Ui * Da * F0, a, Da.trace()};
}

struct NodeRows {
    double J = 1.0;
    Vec2 grad_J;
    Vec2 interior;
};

// a: state of Psi_0^t from x; b: state of Psi_1^s from a.y.
//   D_x log J = -B0 - B1 F0,  d_s log J = -div u1(z),  d_t log J = -div u0(y) + B1 u0(y)
NodeRows node_rows(const VectorFieldSpec& u1, const FullState& a, const TauAt& ta, const FullState& b,
                   double lambda) {
    NodeRows r;
    r.J = std::exp(a.log_det + b.log_det);
    const double dlog_s = u1.is_constant() ? 0.0 : -u1.divergence(b.y);
    const double dlog_t = -ta.div0y + dot(b.B, ta.u0y);
    r.grad_J = -r.J * (a.B + row_times(b.B, a.F));
    const Mat2& T = ta.tau;
    r.interior = r.J * (lambda * (T.row(0) + T.row(1)) - ta.dtau.row(1) - dlog_s * T.row(0) - dlog_t * T.row(1));
    return r;
}

FullState full_state_at(const VectorFieldSpec& f, const Vec2& x, double t, double max_step) {
    FullState out;
    sweep_inverse_full(f, x, {t}, max_step, [&](std::size_t, const FullState& s) { out = s; });
    return out;
}

ScalarState scalar_state_at(const VectorFieldSpec& f, const Vec2& x, double t, double max_step) {
    ScalarState out;
    sweep_inverse_scalar(f, x, {t}, max_step, [&](std::size_t, const ScalarState& s) { out = s; });
    return out;
}

void require_exponential(const QuadratureRule& quad) {
    if (!quad.exponential_law()) throw std::invalid_argument("IBP formula requires exponential switching");
}

void require_times(double s, double t) {
    if (!(s >= 0.0) || !(t >= 0.0)) throw std::domain_error("IBP kernels need s, t >= 0");
}

// Sum over all IBP nodes of weight * row * h(point).
template <class H>
Vec2 ibp_sum(const H& h, const VectorFieldSpec& u0, const VectorFieldSpec& u1, const QuadratureRule& quad,
             const Vec2& x, const FlowOptions& opts) {
    const Rule1D& sr = quad.s();
    const Rule1D& tr = quad.t();
    const double lambda = quad.lambda();
    const double step = opts.max_step;
    Vec2 sum;
    // interior and D_x J terms, plus the s = 0 slice for the t-boundary
    sweep_inverse_full(u0, x, tr.nodes, step, [&](std::size_t j, const FullState& a) {
        const TauAt ta = tau_at(u0, u1, a.y, a.F);
        Vec2 inner;
        sweep_inverse_full(u1, a.y, sr.nodes, step, [&](std::size_t i, const FullState& b) {
            const NodeRows r = node_rows(u1, a, ta, b, lambda);
            inner += (sr.weights[i] * h(b.y)) * (r.grad_J + r.interior);
        });
        sum += tr.weights[j] * inner;
        sum += (tr.weights[j] * -lambda * std::exp(a.log_det) * h(a.y)) * ta.tau.row(0);
    });
    // t = 0 slice: tau_0 = -U(x)^{-1}
    const Mat2 tau0 = -1.0 * drive_inverse(u1.eval(x), u0.eval(x), x);
    double bs = 0.0;
    sweep_inverse_scalar(u1, x, sr.nodes, step, [&](std::size_t i, const ScalarState& b) {
        bs += sr.weights[i] * std::exp(b.log_det) * h(b.y);
    });
    sum += (-lambda * bs) * tau0.row(1);
    return sum;
}

// Psi^r(z) - z for one RK4 step of length r of z' = -u(z).
Vec2 inverse_increment(const VectorFieldSpec& u, const Vec2& z, double r) {
    const Vec2 k1 = -1.0 * u.eval(z);
    const Vec2 k2 = -1.0 * u.eval(z + 0.5 * r * k1);
    const Vec2 k3 = -1.0 * u.eval(z + 0.5 * r * k2);
    const Vec2 k4 = -1.0 * u.eval(z + r * k3);
    return (r / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Psi^r(z + d) - Psi^r(z), integrated jointly with the base trajectory.
Vec2 inverse_difference(const VectorFieldSpec& u, Vec2 z, Vec2 d, double r, double max_step) {
    if (r <= 0.0) return d;
    const int n = step_count(r, max_step);
    const double h = r / n;
    auto g = [&](const Vec2& zb, const Vec2& db) { return u.eval(zb) - u.eval(zb + db); };
    for (int k = 0; k < n; ++k) {
        const Vec2 a1 = -1.0 * u.eval(z), b1 = g(z, d);
        const Vec2 z2 = z + 0.5 * h * a1, d2 = d + 0.5 * h * b1;
        const Vec2 a2 = -1.0 * u.eval(z2), b2 = g(z2, d2);
        const Vec2 z3 = z + 0.5 * h * a2, d3 = d + 0.5 * h * b2;
        const Vec2 a3 = -1.0 * u.eval(z3), b3 = g(z3, d3);
        const Vec2 z4 = z + h * a3, d4 = d + h * b3;
        const Vec2 a4 = -1.0 * u.eval(z4), b4 = g(z4, d4);
        z = z + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        d = d + (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    }
    return d;
}

}  // namespace

TauValue tau_and_derivative(const VectorFieldSpec& u0, const VectorFieldSpec& u1, const TorusPoint& x, double t,
                            const FlowOptions& opts) {
    if (!(t >= 0.0)) throw std::domain_error("tau needs t >= 0");
    const FullState a = full_state_at(u0, x.lift(), t, opts.max_step);
    const TauAt ta = tau_at(u0, u1, a.y, a.F);
    return {ta.tau, ta.dtau, a.y, a.F};
}

Mat2 tau(const VectorFieldSpec& u0, const VectorFieldSpec& u1, const TorusPoint& x, double t,
         const FlowOptions& opts) {
    return tau_and_derivative(u0, u1, x, t, opts).tau;
}

Mat2 tau_dt_centered(const VectorFieldSpec& u0, const VectorFieldSpec& u1, const TorusPoint& x, double t, double h,
                     const FlowOptions& opts) {
    if (!(h > 0.0) || t < h) throw std::domain_error("tau_dt_centered needs 0 < h <= t");
    const Mat2 p = tau(u0, u1, x, t + h, opts);
    const Mat2 m = tau(u0, u1, x, t - h, opts);
    return (0.5 / h) * (p - m);
}

double check_transfer_identity(const VectorFieldSpec& u0, const VectorFieldSpec& u1, const TorusPoint& x, double s,
                               double t, const Vec2& xi, const FlowOptions& opts) {
    require_times(s, t);
    constexpr double h = 1e-5;
    const Vec2 x0 = x.lift();
    const ComposedInverse c = composed_inverse_lifted(u0, u1, x0, s, t, opts);
    const Vec2 lhs = c.chain_jacobian * xi;

    // Differences of displaced trajectories are carried directly, so the
    // central differences do not lose digits to the size of the lift.
    const Vec2 ds = (0.5 / h) * (inverse_increment(u1, c.lift, h) - inverse_increment(u1, c.lift, -h));
    const Vec2 y = advance_point(u0, x0, -t, opts.max_step);
    const Vec2 dp = inverse_difference(u1, y, inverse_increment(u0, y, h), s, opts.max_step);
    const Vec2 dm = inverse_difference(u1, y, inverse_increment(u0, y, -h), s, opts.max_step);
    const Vec2 dt = (0.5 / h) * (dp - dm);

    const Vec2 v = tau(u0, u1, x, t, opts) * xi;
    const Vec2 rhs = v.x1 * ds + v.x2 * dt;
    return norm(lhs - rhs);
}

IbpKernels::IbpKernels(const VectorFieldSpec& u0, const VectorFieldSpec& u1, double lambda, FlowOptions opts)
    : u0_(u0), u1_(u1), lambda_(lambda), opts_(opts) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be > 0");
}

double IbpKernels::interior(const TorusPoint& x, double s, double t, const Vec2& xi) const {
    require_times(s, t);
    const FullState a = full_state_at(u0_, x.lift(), t, opts_.max_step);
    const TauAt ta = tau_at(u0_, u1_, a.y, a.F);
    const FullState b = full_state_at(u1_, a.y, s, opts_.max_step);
    return dot(node_rows(u1_, a, ta, b, lambda_).interior, xi);
}

double IbpKernels::boundary_s(const TorusPoint& x, double s, const Vec2& xi) const {
    require_times(s, 0.0);
    const Vec2 p = x.lift();
    const Mat2 tau0 = -1.0 * drive_inverse(u1_.eval(p), u0_.eval(p), p);
    const ScalarState b = scalar_state_at(u1_, p, s, opts_.max_step);
    return -lambda_ * std::exp(b.log_det) * dot(tau0.row(1), xi);
}

double IbpKernels::boundary_t(const TorusPoint& x, double t, const Vec2& xi) const {
    require_times(0.0, t);
    const FullState a = full_state_at(u0_, x.lift(), t, opts_.max_step);
    const TauAt ta = tau_at(u0_, u1_, a.y, a.F);
    return -lambda_ * std::exp(a.log_det) * dot(ta.tau.row(0), xi);
}

std::pair<double, Vec2> IbpKernels::jacobian_and_gradient(const TorusPoint& x, double s, double t) const {
    require_times(s, t);
    const FullState a = full_state_at(u0_, x.lift(), t, opts_.max_step);
    const FullState b = full_state_at(u1_, a.y, s, opts_.max_step);
    const double J = std::exp(a.log_det + b.log_det);
    return {J, -J * (a.B + row_times(b.B, a.F))};
}

IbpKernels build_kernels(const VectorFieldSpec& u0, const VectorFieldSpec& u1, double lambda,
                         const FlowOptions& opts) {
    return IbpKernels(u0, u1, lambda, opts);
}

double ibp_gradient(const PeriodicSpline& h, const VectorFieldSpec& u0, const VectorFieldSpec& u1,
                    const QuadratureRule& quad, const Vec2& x, const Vec2& xi, const IbpOptions& opts) {
    return dot(ibp_gradient_vector(h, u0, u1, quad, x, opts), xi);
}

Vec2 ibp_gradient_vector(const PeriodicSpline& h, const VectorFieldSpec& u0, const VectorFieldSpec& u1,
                         const QuadratureRule& quad, const Vec2& x, const IbpOptions& opts) {
    require_exponential(quad);
    return ibp_sum([&](const Vec2& p) { return h(p); }, u0, u1, quad, x, opts.flow);
}

double ibp_gradient(const std::function<double(const Vec2&)>& h, const VectorFieldSpec& u0,
                    const VectorFieldSpec& u1, const QuadratureRule& quad, const Vec2& x, const Vec2& xi,
                    const IbpOptions& opts) {
    return dot(ibp_gradient_vector(h, u0, u1, quad, x, opts), xi);
}

Vec2 ibp_gradient_vector(const std::function<double(const Vec2&)>& h, const VectorFieldSpec& u0,
                         const VectorFieldSpec& u1, const QuadratureRule& quad, const Vec2& x,
                         const IbpOptions& opts) {
    require_exponential(quad);
    return ibp_sum(h, u0, u1, quad, x, opts.flow);
}

GradientGrids ibp_gradient_grid(const DensityGrid& h, const VectorFieldSpec& u0, const VectorFieldSpec& u1,
                                const QuadratureRule& quad, const IbpOptions& opts) {
    require_exponential(quad);
    const int n = h.n();
    const PeriodicSpline sp(h);
    GradientGrids g{DensityGrid(n), DensityGrid(n)};
    parallel_for(h.size(), opts.threads, [&](std::size_t c) {
        const Vec2 d = ibp_sum([&](const Vec2& p) { return sp(p); }, u0, u1, quad, h.cell_center(c), opts.flow);
        g.d1.values()[c] = d.x1;
        g.d2.values()[c] = d.x2;
    });
    return g;
}

L1GradientBound l1_gradient_bound(const DensityGrid& h, const VectorFieldSpec& u0, const VectorFieldSpec& u1,
                                  const QuadratureRule& quad, const IbpOptions& opts) {
    const GradientGrids g = ibp_gradient_grid(h, u0, u1, quad, opts);
    L1GradientBound out;
    out.gradient_l1 = direction_sup_l1(g.d1, g.d2);
    out.h_l1 = h.l1_norm();
    out.k_hat = out.h_l1 > 0.0 ? out.gradient_l1 / out.h_l1 : 0.0;
    return out;
}

KernelBoundFit fit_kernel_bound(const IbpKernels& k, double r_max, int samples, std::uint64_t seed) {
    if (!(r_max > 0.0) || samples < 1) throw std::invalid_argument("fit_kernel_bound needs r_max > 0, samples >= 1");
    constexpr int kBins = 10;
    KernelBoundFit fit;
    fit.r_max = r_max;
    fit.samples = samples;
    fit.bin_max.assign(kBins, 0.0);
    std::vector<double> rs, vals;
    CounterRng rng = CounterRng::stream(seed, 0);
    for (int i = 0; i < samples; ++i) {
        const TorusPoint x(rng.uniform(), rng.uniform());
        const double s = r_max * rng.uniform();
        const double t = r_max * rng.uniform();
        const double th = 6.283185307179586 * rng.uniform();
        const Vec2 xi{std::cos(th), std::sin(th)};
        const double v = std::max({std::fabs(k.interior(x, s, t, xi)), std::fabs(k.boundary_s(x, s, xi)),
                                   std::fabs(k.boundary_t(x, t, xi))});
        const double r = s + t;
        rs.push_back(r);
        vals.push_back(v);
        const int bin = std::min(kBins - 1, static_cast<int>(r / (2.0 * r_max) * kBins));
        fit.bin_max[bin] = std::max(fit.bin_max[bin], v);
    }
    for (int b = 0; b < kBins; ++b) fit.bin_r.push_back((b + 0.5) * 2.0 * r_max / kBins);
    fit.exponent = fit_growth_exponent(fit.bin_r, fit.bin_max);
    fit.degree = std::max(0, static_cast<int>(std::ceil(fit.exponent - 1e-9)));
    for (std::size_t i = 0; i < rs.size(); ++i)
        fit.constant = std::max(fit.constant, vals[i] / std::pow(1.0 + rs[i], fit.degree));
    return fit;
}

}  // namespace torswitch
