#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "torswitch/switching_law.hpp"

namespace torswitch {

/// One-dimensional rule: sum_i weights[i] f(nodes[i]).
struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
    double weight_sum() const;
};

/// Gauss-Legendre on [-1, 1].
Rule1D gauss_legendre(int m);
/// Generalized Gauss-Laguerre for the weight x^alpha e^(-x) on (0, inf).
/// Weights sum to Gamma(alpha + 1).
Rule1D gauss_laguerre_standard(int m, double alpha = 0.0);

/// Composite rule parameters, in absolute time units.
struct CompositeOptions {
    /// Gauss-Legendre panels of this width cover [0, cutoff].
    double panel_width = 0.5;
    int points_per_panel = 8;
    double cutoff = 16.0;
    /// Shifted Gauss-Laguerre rule for [cutoff, inf).
    int tail_order = 8;
};

/// Nodes and weights for integrals against chi(s) chi(t) on the quadrant, with
/// chi the switching density (lambda e^(-lambda s) for exponential switching).
/// The rule is a tensor product w_ij = s.weights[i] * t.weights[j].
class QuadratureRule {
public:
    /// Tensor Gauss-Laguerre of order m per axis, rescaled by 1/lambda.
    static QuadratureRule gauss_laguerre(int m, double lambda);
    /// Gauss-Legendre panels on [0, cutoff] weighted by lambda e^(-lambda s),
    /// plus a shifted Gauss-Laguerre tail. Integrates oscillatory integrands
    /// (advected Fourier modes) that a single Laguerre rule cannot resolve.
    static QuadratureRule composite(double lambda, const CompositeOptions& opts = {});
    /// Gauss rule matching the law: Gauss-Laguerre for exponential laws,
    /// generalized Gauss-Laguerre (alpha = shape - 1) for gamma laws.
    static QuadratureRule gauss_for_law(const SwitchingLaw& law, int m);
    /// Composite rule weighted by the law's density.
    static QuadratureRule composite_for_law(const SwitchingLaw& law, const CompositeOptions& opts = {});

    const Rule1D& s() const { return s_; }
    const Rule1D& t() const { return t_; }
    std::size_t size() const { return s_.size() * t_.size(); }
    double weight(std::size_t i, std::size_t j) const { return s_.weights[i] * t_.weights[j]; }
    double total_weight() const { return s_.weight_sum() * t_.weight_sum(); }

    /// Rate parameter of the exponential law (tail rate for other laws).
    double lambda() const { return lambda_; }
    bool exponential_law() const { return exponential_; }
    const std::string& description() const { return description_; }
    /// Order per axis (Gauss rules) or points per panel (composite rules).
    int order() const { return order_; }

    /// Drops nodes whose 1D weight is below `threshold` and rescales the
    /// remaining weights to the original total.
    QuadratureRule pruned(double threshold) const;

private:
    Rule1D s_;
    Rule1D t_;
    double lambda_ = 1.0;
    bool exponential_ = true;
    int order_ = 0;
    std::string description_;
};

}  // namespace torswitch
