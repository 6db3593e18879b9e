#pragma once

#include <vector>

#include "torswitch/linalg.hpp"
#include "torswitch/torus.hpp"
#include "torswitch/vector_fields.hpp"

namespace torswitch {

struct FlowOptions {
    /// RK4 step cap; a time span dt is covered by ceil(|dt| / max_step) equal steps.
    double max_step = 1e-2;
    /// Largest |t| accepted by flow().
    double horizon = 200.0;
};

/// Endpoint and Jacobian of a flow map. `lift` is the endpoint on the
/// universal cover, continuous in the start point and in t.
struct FlowResult {
    TorusPoint endpoint;
    Vec2 lift;
    Mat2 jacobian = Mat2::identity();
    double elapsed = 0.0;
};

/// Number of equal RK4 steps used to cover a span dt.
int step_count(double dt, double max_step);

/// One classical RK4 step of x' = u(x) jointly with D' = Du(x) D.
void rk4_variational_step(const VectorFieldSpec& field, Vec2& x, Mat2& D, double h);
/// One RK4 step of x' = u(x) without the variational part.
Vec2 rk4_point_step(const VectorFieldSpec& field, const Vec2& x, double h);

/// Phi^t(x) and D_x Phi^t(x) starting from a point on the cover. Constant
/// fields are advanced in closed form (RK4 is exact for them).
/// Throws IntegrationError on non-finite state.
FlowResult flow_lifted(const VectorFieldSpec& field, const Vec2& x, double t, const FlowOptions& opts = {});

/// Phi^t(x). Throws std::domain_error when |t| exceeds opts.horizon.
FlowResult flow(const VectorFieldSpec& field, const TorusPoint& x, double t, const FlowOptions& opts = {});

/// Psi^t(x) = Phi^{-t}(x); the jacobian field holds F^t(x) = D_x Psi^t(x).
FlowResult inverse_flow(const VectorFieldSpec& field, const TorusPoint& x, double t, const FlowOptions& opts = {});

/// Endpoint only, on the cover.
Vec2 advance_point(const VectorFieldSpec& field, const Vec2& x, double t, double max_step = 1e-2);

/// Psi^{(s,t)}(x) = Psi_1^s(Psi_0^t x) with chain Jacobian F_1^s(Psi_0^t x) F_0^t(x).
struct ComposedInverse {
    TorusPoint point;
    Vec2 lift;
    Mat2 chain_jacobian = Mat2::identity();
    double scalar_jacobian = 1.0;
};

/// Requires s, t >= 0.
ComposedInverse composed_inverse(const VectorFieldSpec& u0, const VectorFieldSpec& u1, const TorusPoint& x,
                                 double s, double t, const FlowOptions& opts = {});
/// Same on the cover, without the sign restriction (used by finite-difference checks).
ComposedInverse composed_inverse_lifted(const VectorFieldSpec& u0, const VectorFieldSpec& u1, const Vec2& x,
                                        double s, double t, const FlowOptions& opts = {});

struct JacobianScanRow {
    double t = 0.0;
    double min_det = 0.0;
    double max_det = 0.0;
    /// max over the grid of the largest |entry| of D_x Phi^t.
    double max_first_partial = 0.0;
};

struct JacobianScan {
    double min_det = 0.0;
    double max_det = 0.0;
    std::vector<JacobianScanRow> table;
    /// Least-squares slope of log(max_first_partial) against log(1 + t).
    double growth_exponent = 0.0;
};

/// Scans det D_x Phi^t and first partials for t = 1..t_max over the cell
/// centres of a grid_resolution^2 grid.
JacobianScan jacobian_bounds_scan(const VectorFieldSpec& field, int t_max, int grid_resolution,
                                  const FlowOptions& opts = {}, int threads = 1);

/// Log-log regression slope of values against (1 + t). Non-positive values are
/// skipped; returns 0 when fewer than two usable points remain.
double fit_growth_exponent(const std::vector<double>& ts, const std::vector<double>& values);

}  // namespace torswitch
