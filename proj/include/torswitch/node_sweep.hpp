#pragma once

// Inverse-flow trajectories visited at a sorted list of quadrature times.
// One trajectory per start point serves every node, instead of one flow
// integration per node.

#include <functional>
#include <vector>

#include "torswitch/linalg.hpp"
#include "torswitch/vector_fields.hpp"

namespace torswitch {

/// State of r -> Psi^r(x) = Phi^{-r}(x): point on the cover and log det F^r(x).
struct ScalarState {
    Vec2 y;
    double log_det = 0.0;
};

/// ScalarState plus F^r(x) = D_x Psi^r(x) and the row vector
/// B^r(x) = int_0^r grad(div u)(Psi^q x)^T F^q(x) dq, so D_x log det F^r = -B^r.
struct FullState {
    Vec2 y;
    double log_det = 0.0;
    Mat2 F = Mat2::identity();
    Vec2 B;
};

/// Visits the inverse flow of `field` from x at every time in `times`
/// (any order, all >= 0), calling visit(index, state). Between consecutive
/// sorted times the span is covered by equal RK4 steps of at most max_step.
void sweep_inverse_scalar(const VectorFieldSpec& field, const Vec2& x, const std::vector<double>& times,
                          double max_step, const std::function<void(std::size_t, const ScalarState&)>& visit);

void sweep_inverse_full(const VectorFieldSpec& field, const Vec2& x, const std::vector<double>& times,
                        double max_step, const std::function<void(std::size_t, const FullState&)>& visit);

/// Ascending order of `times`.
std::vector<std::size_t> sorted_order(const std::vector<double>& times);

}  // namespace torswitch
