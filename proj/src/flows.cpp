#include "torswitch/flows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "torswitch/errors.hpp"
#include "torswitch/parallel.hpp"

namespace torswitch {

namespace {

bool finite(const Vec2& v) { return std::isfinite(v.x1) && std::isfinite(v.x2); }
bool finite(const Mat2& m) {
    return std::isfinite(m.a11) && std::isfinite(m.a12) && std::isfinite(m.a21) && std::isfinite(m.a22);
}

}  // namespace

int step_count(double dt, double max_step) {
    if (!(max_step > 0.0)) throw std::invalid_argument("max_step must be positive");
    const double n = std::ceil(std::abs(dt) / max_step - 1e-12);
    return std::max(1, static_cast<int>(n));
}

void rk4_variational_step(const VectorFieldSpec& field, Vec2& x, Mat2& D, double h) {
    const auto [k1, J1] = field.eval_and_jacobian(x);
    const Mat2 L1 = J1 * D;
    const auto [k2, J2] = field.eval_and_jacobian(x + 0.5 * h * k1);
    const Mat2 L2 = J2 * (D + 0.5 * h * L1);
    const auto [k3, J3] = field.eval_and_jacobian(x + 0.5 * h * k2);
    const Mat2 L3 = J3 * (D + 0.5 * h * L2);
    const auto [k4, J4] = field.eval_and_jacobian(x + h * k3);
    const Mat2 L4 = J4 * (D + h * L3);
    x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    D = D + (h / 6.0) * (L1 + 2.0 * L2 + 2.0 * L3 + L4);
}

Vec2 rk4_point_step(const VectorFieldSpec& field, const Vec2& x, double h) {
    const Vec2 k1 = field.eval(x);
    const Vec2 k2 = field.eval(x + 0.5 * h * k1);
    const Vec2 k3 = field.eval(x + 0.5 * h * k2);
    const Vec2 k4 = field.eval(x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

FlowResult flow_lifted(const VectorFieldSpec& field, const Vec2& x, double t, const FlowOptions& opts) {
    FlowResult r;
    r.elapsed = t;
    if (field.is_constant()) {
        r.lift = x + t * field.base();
        r.endpoint = TorusPoint(r.lift);
        return r;
    }
    Vec2 y = x;
    Mat2 D = Mat2::identity();
    if (t != 0.0) {
        const int n = step_count(t, opts.max_step);
        const double h = t / n;
        for (int k = 0; k < n; ++k) {
            rk4_variational_step(field, y, D, h);
            if (!finite(y) || !finite(D))
                throw IntegrationError("non-finite state in flow integration at step " + std::to_string(k));
        }
    }
    r.lift = y;
    r.endpoint = TorusPoint(y);
    r.jacobian = D;
    return r;
}

FlowResult flow(const VectorFieldSpec& field, const TorusPoint& x, double t, const FlowOptions& opts) {
    if (!std::isfinite(t) || std::abs(t) > opts.horizon)
        throw std::domain_error("flow time " + std::to_string(t) + " outside horizon");
    return flow_lifted(field, x.lift(), t, opts);
}

FlowResult inverse_flow(const VectorFieldSpec& field, const TorusPoint& x, double t, const FlowOptions& opts) {
    FlowResult r = flow(field, x, -t, opts);
    r.elapsed = t;
    return r;
}

Vec2 advance_point(const VectorFieldSpec& field, const Vec2& x, double t, double max_step) {
    if (field.is_constant()) return x + t * field.base();
    if (t == 0.0) return x;
    const int n = step_count(t, max_step);
    const double h = t / n;
    Vec2 y = x;
    for (int k = 0; k < n; ++k) y = rk4_point_step(field, y, h);
    if (!finite(y)) throw IntegrationError("non-finite state in flow integration");
    return y;
}

ComposedInverse composed_inverse_lifted(const VectorFieldSpec& u0, const VectorFieldSpec& u1, const Vec2& x,
                                        double s, double t, const FlowOptions& opts) {
    const FlowResult a = flow_lifted(u0, x, -t, opts);
    const FlowResult b = flow_lifted(u1, a.lift, -s, opts);
    ComposedInverse c;
    c.lift = b.lift;
    c.point = b.endpoint;
    c.chain_jacobian = b.jacobian * a.jacobian;
    c.scalar_jacobian = c.chain_jacobian.det();
    return c;
}

ComposedInverse composed_inverse(const VectorFieldSpec& u0, const VectorFieldSpec& u1, const TorusPoint& x,
                                 double s, double t, const FlowOptions& opts) {
    if (!(s >= 0.0) || !(t >= 0.0)) throw std::domain_error("composed_inverse requires s, t >= 0");
    if (s > opts.horizon || t > opts.horizon) throw std::domain_error("composed_inverse time outside horizon");
    return composed_inverse_lifted(u0, u1, x.lift(), s, t, opts);
}

double fit_growth_exponent(const std::vector<double>& ts, const std::vector<double>& values) {
    if (ts.size() != values.size()) throw std::invalid_argument("fit_growth_exponent: size mismatch");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!(values[i] > 0.0) || !(ts[i] > -1.0)) continue;
        const double lx = std::log1p(ts[i]);
        const double ly = std::log(values[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return 0.0;
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return 0.0;
    return (n * sxy - sx * sy) / den;
}

JacobianScan jacobian_bounds_scan(const VectorFieldSpec& field, int t_max, int grid_resolution,
                                  const FlowOptions& opts, int threads) {
    if (t_max < 1) throw std::invalid_argument("t_max must be >= 1");
    if (grid_resolution < 1) throw std::invalid_argument("grid_resolution must be >= 1");
    if (t_max > opts.horizon) throw std::domain_error("t_max outside horizon");
    const int n = grid_resolution;
    const std::size_t cells = static_cast<std::size_t>(n) * n;
    // per cell: min det, max det, max partial at each integer time
    std::vector<double> dmin(cells * t_max), dmax(cells * t_max), pmax(cells * t_max);
    parallel_for(cells, threads, [&](std::size_t c) {
        const int j = static_cast<int>(c / n);
        const int k = static_cast<int>(c % n);
        Vec2 y{(j + 0.5) / n, (k + 0.5) / n};
        Mat2 D = Mat2::identity();
        for (int t = 1; t <= t_max; ++t) {
            if (field.is_constant()) {
                y = y + field.base();
            } else {
                const int steps = step_count(1.0, opts.max_step);
                const double h = 1.0 / steps;
                for (int s = 0; s < steps; ++s) rk4_variational_step(field, y, D, h);
                if (!finite(y) || !finite(D)) throw IntegrationError("non-finite state in Jacobian scan");
            }
            const std::size_t idx = c * t_max + (t - 1);
            dmin[idx] = dmax[idx] = D.det();
            pmax[idx] = D.max_abs();
        }
    });

    JacobianScan scan;
    scan.min_det = std::numeric_limits<double>::infinity();
    scan.max_det = -std::numeric_limits<double>::infinity();
    std::vector<double> ts, ps;
    for (int t = 1; t <= t_max; ++t) {
        JacobianScanRow row;
        row.t = t;
        row.min_det = std::numeric_limits<double>::infinity();
        row.max_det = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < cells; ++c) {
            const std::size_t idx = c * t_max + (t - 1);
            row.min_det = std::min(row.min_det, dmin[idx]);
            row.max_det = std::max(row.max_det, dmax[idx]);
            row.max_first_partial = std::max(row.max_first_partial, pmax[idx]);
        }
        scan.min_det = std::min(scan.min_det, row.min_det);
        scan.max_det = std::max(scan.max_det, row.max_det);
        scan.table.push_back(row);
        ts.push_back(row.t);
        ps.push_back(row.max_first_partial);
    }
    scan.growth_exponent = fit_growth_exponent(ts, ps);
    return scan;
}

}  // namespace torswitch
