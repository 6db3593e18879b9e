#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "torswitch/density_grid.hpp"
#include "torswitch/flows.hpp"
#include "torswitch/quadrature.hpp"
#include "torswitch/vector_fields.hpp"

namespace torswitch {

struct TransferOptions {
    FlowOptions flow;
    int threads = 1;
    /// Plans with more (cell, node) pairs than this are evaluated on the fly.
    std::size_t max_cached_entries = 30'000'000;
};

/// Grid discretization of the two-switch operator
///     (Qh)(x) = sum_ij w_ij J_{(s_i,t_j)}(x) h(Psi^{(s_i,t_j)} x)
/// with h read through its periodic spline. For non-constant fields the
/// node points and weighted Jacobians of every cell are cached once.
class TransferOperator {
public:
    TransferOperator(const VectorFieldSpec& u0, const VectorFieldSpec& u1, QuadratureRule quad, int n,
                     TransferOptions opts = {});

    int n() const { return n_; }
    const QuadratureRule& quadrature() const { return quad_; }
    bool cached() const { return !plan_offsets_.empty(); }

    /// Qh on the grid. Not renormalized.
    DensityGrid apply(const DensityGrid& h) const;
    /// Qh at an arbitrary point.
    double apply_at(const PeriodicSpline& h, const Vec2& x) const;
    /// Same with h given as a function on the cover (periodic).
    double apply_at(const std::function<double(const Vec2&)>& h, const Vec2& x) const;

private:
    template <class Visit>
    void visit_nodes(const Vec2& x, Visit&& visit) const;

    VectorFieldSpec u0_, u1_;
    QuadratureRule quad_;
    int n_;
    TransferOptions opts_;
    std::vector<std::size_t> plan_offsets_;
    std::vector<double> plan_x1_, plan_x2_, plan_w_;
};

/// One-switch operator (S_i h)(x) = sum_k w_k det F_i^{t_k}(x) h(Psi_i^{t_k} x).
class SingleSwitchOperator {
public:
    SingleSwitchOperator(const VectorFieldSpec& field, Rule1D rule, int n, TransferOptions opts = {});

    int n() const { return n_; }
    DensityGrid apply(const DensityGrid& h) const;
    double apply_at(const PeriodicSpline& h, const Vec2& x) const;

private:
    VectorFieldSpec field_;
    Rule1D rule_;
    int n_;
    TransferOptions opts_;
    std::vector<double> plan_x1_, plan_x2_, plan_w_;
};

/// Convenience wrapper building a TransferOperator for h's grid.
DensityGrid apply_Q(const DensityGrid& h, const VectorFieldSpec& u0, const VectorFieldSpec& u1,
                    const QuadratureRule& quad, const TransferOptions& opts = {});

/// S_i h with the field u_i of the pair; i must be 0 or 1 (std::invalid_argument otherwise).
DensityGrid apply_single_switch(const DensityGrid& h, int i, const FieldPair& fields, const Rule1D& rule,
                                const TransferOptions& opts = {});

struct FixedPointResult {
    DensityGrid rho;
    int iterations = 0;
    /// ||Q rho - rho||_{L1} of the returned iterate.
    double residual = 0.0;
    bool converged = false;
    std::vector<double> residual_history;
};

/// Power iteration h <- normalize(Qh). Iteration k measures ||Qh - h||_{L1}
/// for the current h and stops when it drops below tol; the returned rho is
/// the iterate that residual belongs to. Without convergence the iterate with
/// the smallest residual is returned and `converged` is false.
template <class Op>
FixedPointResult fixed_point(const Op& Q, DensityGrid h0, double tol, int max_iter) {
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    h0.normalize();
    FixedPointResult out;
    out.residual = std::numeric_limits<double>::infinity();
    DensityGrid h = std::move(h0);
    for (int it = 1; it <= max_iter; ++it) {
        DensityGrid q = Q.apply(h);
        const double res = l1_distance(q, h);
        out.residual_history.push_back(res);
        out.iterations = it;
        if (res < out.residual) {
            out.rho = h;
            out.residual = res;
        }
        if (res < tol) {
            out.converged = true;
            break;
        }
        q.normalize();
        h = std::move(q);
    }
    return out;
}

/// S_0 o S_1 with the intermediate result re-gridded on the same n x n grid.
class SplitTransferOperator {
public:
    SplitTransferOperator(const FieldPair& fields, const QuadratureRule& quad, int n, TransferOptions opts = {});
    int n() const { return s0_.n(); }
    DensityGrid apply(const DensityGrid& h) const { return s0_.apply(s1_.apply(h)); }
    const SingleSwitchOperator& first() const { return s1_; }
    const SingleSwitchOperator& second() const { return s0_; }

private:
    SingleSwitchOperator s1_;
    SingleSwitchOperator s0_;
};

struct SmoothingRow {
    int k = 0;
    double gradient_l1 = 0.0;
    double hessian_l1 = 0.0;
};

/// ||grad (Q^k h)||_{L1} and ||grad^2 (Q^k h)||_{L1} for k = 0..n_applications
/// (at most 5), with Q applied as S_0 o S_1 on h's grid.
std::vector<SmoothingRow> smoothing_profile(const DensityGrid& h, const FieldPair& fields,
                                            const QuadratureRule& quad, int n_applications,
                                            const TransferOptions& opts = {});

}  // namespace torswitch
