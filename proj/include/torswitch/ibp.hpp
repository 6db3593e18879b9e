#pragma once

// Integration by parts for D_x(Qh): the spatial derivative is traded for
// (s,t)-derivatives through tau_t(x) = -U(Psi_0^t x)^{-1} F_0^t(x), which then
// land on the exponential switching density and on J. Exponential switching only.

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "torswitch/density_grid.hpp"
#include "torswitch/flows.hpp"
#include "torswitch/quadrature.hpp"
#include "torswitch/vector_fields.hpp"

namespace torswitch {

struct IbpOptions {
    FlowOptions flow;
    int threads = 1;
};

/// tau_t(x), its t-derivative and the inverse-flow data it came from.
struct TauValue {
    Mat2 tau;
    Mat2 dtau;
    Vec2 y;  // Psi_0^t x on the cover
    Mat2 F0 = Mat2::identity();
};

/// tau_t(x) with d/dt tau from the variational equations. Throws
/// SingularMatrixError when U is singular at Psi_0^t x.
TauValue tau_and_derivative(const VectorFieldSpec& u0, const VectorFieldSpec& u1, const TorusPoint& x, double t,
                            const FlowOptions& opts = {});
Mat2 tau(const VectorFieldSpec& u0, const VectorFieldSpec& u1, const TorusPoint& x, double t,
         const FlowOptions& opts = {});
/// Centred difference (tau_{t+h} - tau_{t-h}) / 2h; needs t >= h.
Mat2 tau_dt_centered(const VectorFieldSpec& u0, const VectorFieldSpec& u1, const TorusPoint& x, double t,
                     double h = 1e-4, const FlowOptions& opts = {});

/// |D_x Psi^{(s,t)}(x) xi - D_{(s,t)} Psi^{(s,t)}(x) tau_t(x) xi|, the left side
/// from the variational chain Jacobian, the right side from centred
/// differences of Psi in (s,t) with step 1e-5 on the cover.
double check_transfer_identity(const VectorFieldSpec& u0, const VectorFieldSpec& u1, const TorusPoint& x, double s,
                               double t, const Vec2& xi, const FlowOptions& opts = {});

/// The three kernels of the IBP formula for G = J_{(s,t)}(x):
///   interior   = J (lambda (1.tau xi) - e2.d_t tau xi) - D_{(s,t)}J . tau xi
///   boundary_s = -lambda J(x,s,0) (tau_0 xi).e2
///   boundary_t = -lambda J(x,0,t) (tau_t xi).e1
/// Derivatives of J come from the Liouville and variational equations.
class IbpKernels {
public:
    IbpKernels(const VectorFieldSpec& u0, const VectorFieldSpec& u1, double lambda, FlowOptions opts = {});

    double lambda() const { return lambda_; }
    double interior(const TorusPoint& x, double s, double t, const Vec2& xi) const;
    double boundary_s(const TorusPoint& x, double s, const Vec2& xi) const;
    double boundary_t(const TorusPoint& x, double t, const Vec2& xi) const;
    /// J_{(s,t)}(x) and D_x J_{(s,t)}(x).
    std::pair<double, Vec2> jacobian_and_gradient(const TorusPoint& x, double s, double t) const;

private:
    VectorFieldSpec u0_, u1_;
    double lambda_;
    FlowOptions opts_;
};

IbpKernels build_kernels(const VectorFieldSpec& u0, const VectorFieldSpec& u1, double lambda,
                         const FlowOptions& opts = {});

/// D_x(Qh)(x) xi without derivatives of h: E[(D_xJ xi + interior) h(Psi^{(S,T)}x)]
/// + E_S[boundary_s h(Psi^{(S,0)}x)] + E_T[boundary_t h(Psi^{(0,T)}x)], with
/// the 2D rule and its two 1D factors. h is read through its spline.
double ibp_gradient(const PeriodicSpline& h, const VectorFieldSpec& u0, const VectorFieldSpec& u1,
                    const QuadratureRule& quad, const Vec2& x, const Vec2& xi, const IbpOptions& opts = {});
/// Both partials (xi = e1, e2) from one pass over the nodes.
Vec2 ibp_gradient_vector(const PeriodicSpline& h, const VectorFieldSpec& u0, const VectorFieldSpec& u1,
                         const QuadratureRule& quad, const Vec2& x, const IbpOptions& opts = {});

/// h given as a periodic function on the cover.
double ibp_gradient(const std::function<double(const Vec2&)>& h, const VectorFieldSpec& u0,
                    const VectorFieldSpec& u1, const QuadratureRule& quad, const Vec2& x, const Vec2& xi,
                    const IbpOptions& opts = {});
Vec2 ibp_gradient_vector(const std::function<double(const Vec2&)>& h, const VectorFieldSpec& u0,
                         const VectorFieldSpec& u1, const QuadratureRule& quad, const Vec2& x,
                         const IbpOptions& opts = {});

struct GradientGrids {
    DensityGrid d1;
    DensityGrid d2;
};
/// ibp_gradient_vector at every cell centre of h's grid.
GradientGrids ibp_gradient_grid(const DensityGrid& h, const VectorFieldSpec& u0, const VectorFieldSpec& u1,
                                const QuadratureRule& quad, const IbpOptions& opts = {});

struct L1GradientBound {
    double gradient_l1 = 0.0;  // ||grad(Qh)||_{L1}, sup-over-directions surrogate
    double h_l1 = 0.0;
    double k_hat = 0.0;  // gradient_l1 / h_l1
};
L1GradientBound l1_gradient_bound(const DensityGrid& h, const VectorFieldSpec& u0, const VectorFieldSpec& u1,
                                  const QuadratureRule& quad, const IbpOptions& opts = {});

/// Polynomial envelope |kernel| <= c (1 + s + t)^degree over random samples.
struct KernelBoundFit {
    double exponent = 0.0;  // log-log slope of the binned maxima
    int degree = 0;         // ceil(exponent), at least 0
    double constant = 0.0;  // smallest c making the envelope hold at that degree
    double r_max = 0.0;
    int samples = 0;
    std::vector<double> bin_r;
    std::vector<double> bin_max;
};

/// Samples all three kernels at `samples` random (x, s, t in [0, r_max], unit xi)
/// and fits the envelope of their absolute values against 1 + s + t.
KernelBoundFit fit_kernel_bound(const IbpKernels& k, double r_max, int samples, std::uint64_t seed);

}  // namespace torswitch
