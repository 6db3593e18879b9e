#include "torswitch/node_sweep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "torswitch/errors.hpp"
#include "torswitch/flows.hpp"

namespace torswitch {

namespace {

struct ScalarDeriv {
    Vec2 dy;
    double dl;
};

inline ScalarDeriv scalar_rhs(const VectorFieldSpec& f, const Vec2& y) {
    const auto [u, J] = f.eval_and_jacobian(y);
    return {-1.0 * u, -J.trace()};
}

void rk4_scalar(const VectorFieldSpec& f, ScalarState& s, double h) {
    const ScalarDeriv k1 = scalar_rhs(f, s.y);
    const ScalarDeriv k2 = scalar_rhs(f, s.y + 0.5 * h * k1.dy);
    const ScalarDeriv k3 = scalar_rhs(f, s.y + 0.5 * h * k2.dy);
    const ScalarDeriv k4 = scalar_rhs(f, s.y + h * k3.dy);
    s.y = s.y + (h / 6.0) * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
    s.log_det += (h / 6.0) * (k1.dl + 2.0 * k2.dl + 2.0 * k3.dl + k4.dl);
}

struct FullDeriv {
    Vec2 dy;
    double dl;
    Mat2 dF;
    Vec2 dB;
};

inline FullDeriv full_rhs(const VectorFieldSpec& f, const Vec2& y, const Mat2& F) {
    const auto [u, J] = f.eval_and_jacobian(y);
    const Vec2 gd = f.divergence_gradient(y);
    return {-1.0 * u, -J.trace(), -1.0 * (J * F), row_times(gd, F)};
}

void rk4_full(const VectorFieldSpec& f, FullState& s, double h) {
    const FullDeriv k1 = full_rhs(f, s.y, s.F);
    const FullDeriv k2 = full_rhs(f, s.y + 0.5 * h * k1.dy, s.F + 0.5 * h * k1.dF);
    const FullDeriv k3 = full_rhs(f, s.y + 0.5 * h * k2.dy, s.F + 0.5 * h * k2.dF);
    const FullDeriv k4 = full_rhs(f, s.y + h * k3.dy, s.F + h * k3.dF);
    const double c = h / 6.0;
    s.y = s.y + c * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
    s.log_det += c * (k1.dl + 2.0 * k2.dl + 2.0 * k3.dl + k4.dl);
    s.F = s.F + c * (k1.dF + 2.0 * k2.dF + 2.0 * k3.dF + k4.dF);
    s.B = s.B + c * (k1.dB + 2.0 * k2.dB + 2.0 * k3.dB + k4.dB);
}

void check_times(const std::vector<double>& times) {
    for (double t : times)
        if (!(t >= 0.0) || !std::isfinite(t)) throw std::domain_error("sweep times must be finite and >= 0");
}

}  // namespace

std::vector<std::size_t> sorted_order(const std::vector<double>& times) {
    std::vector<std::size_t> idx(times.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
    return idx;
}

void sweep_inverse_scalar(const VectorFieldSpec& field, const Vec2& x, const std::vector<double>& times,
                          double max_step, const std::function<void(std::size_t, const ScalarState&)>& visit) {
    check_times(times);
    if (field.is_constant()) {
        const Vec2 v = field.base();
        for (std::size_t i = 0; i < times.size(); ++i) visit(i, ScalarState{x - times[i] * v, 0.0});
        return;
    }
    ScalarState s{x, 0.0};
    double r = 0.0;
    for (std::size_t i : sorted_order(times)) {
        const double span = times[i] - r;
        if (span > 0.0) {
            const int n = step_count(span, max_step);
            const double h = span / n;
            for (int k = 0; k < n; ++k) rk4_scalar(field, s, h);
            if (!std::isfinite(s.y.x1) || !std::isfinite(s.y.x2) || !std::isfinite(s.log_det))
                throw IntegrationError("non-finite state in inverse-flow sweep");
            r = times[i];
        }
        visit(i, s);
    }
}

void sweep_inverse_full(const VectorFieldSpec& field, const Vec2& x, const std::vector<double>& times,
                        double max_step, const std::function<void(std::size_t, const FullState&)>& visit) {
    check_times(times);
    if (field.is_constant()) {
        const Vec2 v = field.base();
        for (std::size_t i = 0; i < times.size(); ++i) {
            FullState s;
            s.y = x - times[i] * v;
            visit(i, s);
        }
        return;
    }
    FullState s;
    s.y = x;
    double r = 0.0;
    for (std::size_t i : sorted_order(times)) {
        const double span = times[i] - r;
        if (span > 0.0) {
            const int n = step_count(span, max_step);
            const double h = span / n;
            for (int k = 0; k < n; ++k) rk4_full(field, s, h);
            if (!std::isfinite(s.y.x1) || !std::isfinite(s.F.a11) || !std::isfinite(s.B.x1))
                throw IntegrationError("non-finite state in inverse-flow sweep");
            r = times[i];
        }
        visit(i, s);
    }
}

}  // namespace torswitch
