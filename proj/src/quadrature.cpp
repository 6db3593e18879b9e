#include "torswitch/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "torswitch/errors.hpp"

namespace torswitch {

namespace {

constexpr double kPi = 3.14159265358979323846;

Rule1D composite_rule(const std::function<double(double)>& chi, double tail_rate, const CompositeOptions& o) {
    if (!(o.panel_width > 0.0) || o.points_per_panel < 1 || !(o.cutoff > 0.0) || o.tail_order < 1)
        throw std::invalid_argument("invalid composite quadrature options");
    const Rule1D gl = gauss_legendre(o.points_per_panel);
    const int panels = std::max(1, static_cast<int>(std::ceil(o.cutoff / o.panel_width - 1e-9)));
    const double width = o.cutoff / panels;
    Rule1D r;
    for (int p = 0; p < panels; ++p) {
        const double a = p * width;
        for (std::size_t i = 0; i < gl.size(); ++i) {
            const double s = a + 0.5 * width * (gl.nodes[i] + 1.0);
            r.nodes.push_back(s);
            r.weights.push_back(0.5 * width * gl.weights[i] * chi(s));
        }
    }
    const Rule1D lag = gauss_laguerre_standard(o.tail_order, 0.0);
    for (std::size_t i = 0; i < lag.size(); ++i) {
        const double s = o.cutoff + lag.nodes[i] / tail_rate;
        r.nodes.push_back(s);
        r.weights.push_back(lag.weights[i] * std::exp(lag.nodes[i]) / tail_rate * chi(s));
    }
    return r;
}

}  // namespace

double Rule1D::weight_sum() const {
    // pairwise-insensitive: weights are positive, sum smallest first
    std::vector<double> w = weights;
    std::sort(w.begin(), w.end());
    return std::accumulate(w.begin(), w.end(), 0.0);
}

Rule1D gauss_legendre(int m) {
    if (m < 1) throw std::invalid_argument("Gauss-Legendre order must be >= 1");
    Rule1D r;
    r.nodes.resize(m);
    r.weights.resize(m);
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (m + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < m; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
            }
            pp = m * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        r.nodes[i] = -z;
        r.nodes[m - 1 - i] = z;
        r.weights[i] = r.weights[m - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return r;
}

Rule1D gauss_laguerre_standard(int m, double alpha) {
    if (m < 1) throw std::invalid_argument("Gauss-Laguerre order must be >= 1");
    if (!(alpha > -1.0)) throw std::invalid_argument("Gauss-Laguerre alpha must be > -1");
    Rule1D r;
    r.nodes.resize(m);
    r.weights.resize(m);
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = (1.0 + alpha) * (3.0 + 0.92 * alpha) / (1.0 + 2.4 * m + 1.8 * alpha);
        else if (i == 1)
            z += (15.0 + 6.25 * alpha) / (1.0 + 0.9 * alpha + 2.5 * m);
        else {
            const double ai = i - 1;
            z += ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * alpha / (1.0 + 3.5 * ai)) *
                 (z - r.nodes[i - 2]) / (1.0 + 0.3 * alpha);
        }
        double p1 = 0.0, p2 = 0.0, pp = 0.0;
        bool converged = false;
        for (int it = 0; it < 200; ++it) {
            p1 = 1.0;
            p2 = 0.0;
            for (int j = 0; j < m; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1 + alpha - z) * p2 - (j + alpha) * p3) / (j + 1);
            }
            pp = (m * p1 - (m + alpha) * p2) / z;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 3e-14 * std::max(1.0, std::abs(z))) {
                converged = true;
                break;
            }
        }
        if (!converged) throw NumericalError("Gauss-Laguerre root iteration did not converge");
        r.nodes[i] = z;
        r.weights[i] = -std::exp(std::lgamma(alpha + m) - std::lgamma(static_cast<double>(m))) / (pp * m * p2);
    }
    return r;
}

QuadratureRule QuadratureRule::gauss_laguerre(int m, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    Rule1D r = gauss_laguerre_standard(m, 0.0);
    for (double& x : r.nodes) x /= lambda;
    QuadratureRule q;
    q.s_ = r;
    q.t_ = r;
    q.lambda_ = lambda;
    q.order_ = m;
    q.description_ = "gauss_laguerre(m=" + std::to_string(m) + ")";
    return q;
}

QuadratureRule QuadratureRule::composite(double lambda, const CompositeOptions& opts) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    const Rule1D r = composite_rule([lambda](double s) { return lambda * std::exp(-lambda * s); }, lambda, opts);
    QuadratureRule q;
    q.s_ = r;
    q.t_ = r;
    q.lambda_ = lambda;
    q.order_ = opts.points_per_panel;
    q.description_ = "composite(panel=" + std::to_string(opts.panel_width) + ",p=" +
                     std::to_string(opts.points_per_panel) + ",cutoff=" + std::to_string(opts.cutoff) +
                     ",tail=" + std::to_string(opts.tail_order) + ")";
    return q;
}

QuadratureRule QuadratureRule::gauss_for_law(const SwitchingLaw& law, int m) {
    if (law.is_exponential()) return gauss_laguerre(m, law.lambda());
    if (!law.is_gamma()) throw std::invalid_argument("Gauss rule available for exponential and gamma laws only");
    Rule1D r = gauss_laguerre_standard(m, law.shape() - 1.0);
    const double norm = std::exp(std::lgamma(law.shape()));
    for (std::size_t i = 0; i < r.size(); ++i) {
        r.nodes[i] /= law.tail_rate();
        r.weights[i] /= norm;
    }
    QuadratureRule q;
    q.s_ = r;
    q.t_ = r;
    q.lambda_ = law.tail_rate();
    q.exponential_ = false;
    q.order_ = m;
    q.description_ = "generalized_gauss_laguerre(m=" + std::to_string(m) + "," + law.name() + ")";
    return q;
}

QuadratureRule QuadratureRule::composite_for_law(const SwitchingLaw& law, const CompositeOptions& opts) {
    if (law.is_exponential()) return composite(law.lambda(), opts);
    const Rule1D r = composite_rule([&law](double s) { return law.density(s); }, law.tail_rate(), opts);
    QuadratureRule q;
    q.s_ = r;
    q.t_ = r;
    q.lambda_ = law.tail_rate();
    q.exponential_ = false;
    q.order_ = opts.points_per_panel;
    q.description_ = "composite(" + law.name() + ")";
    return q;
}

QuadratureRule QuadratureRule::pruned(double threshold) const {
    auto prune = [threshold](const Rule1D& r) {
        const double total = r.weight_sum();
        Rule1D out;
        for (std::size_t i = 0; i < r.size(); ++i)
            if (r.weights[i] >= threshold) {
                out.nodes.push_back(r.nodes[i]);
                out.weights.push_back(r.weights[i]);
            }
        if (out.size() == 0) throw std::invalid_argument("pruning removed every node");
        const double scale = total / out.weight_sum();
        for (double& w : out.weights) w *= scale;
        return out;
    };
    QuadratureRule q = *this;
    q.s_ = prune(s_);
    q.t_ = prune(t_);
    return q;
}

}  // namespace torswitch
