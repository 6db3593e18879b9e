#include "torswitch/transfer_operator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "torswitch/errors.hpp"
#include "torswitch/node_sweep.hpp"
#include "torswitch/parallel.hpp"

namespace torswitch {

namespace {

std::size_t cells_of(int n) { return static_cast<std::size_t>(n) * n; }

template <class CellFn>
DensityGrid fill_grid(int n, int threads, CellFn&& cell_value) {
    DensityGrid out(n);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t j) {
        for (int k = 0; k < n; ++k) {
            const std::size_t c = j * n + k;
            out.values()[c] = cell_value(c);
        }
    });
    return out;
}

void check_grid(const DensityGrid& h, int n) {
    if (h.n() != n)
        throw std::invalid_argument("grid size " + std::to_string(h.n()) + " does not match operator size " +
                                    std::to_string(n));
}

}  // namespace

TransferOperator::TransferOperator(const VectorFieldSpec& u0, const VectorFieldSpec& u1, QuadratureRule quad, int n,
                                   TransferOptions opts)
    : u0_(u0), u1_(u1), quad_(std::move(quad)), n_(n), opts_(opts) {
    if (n < 1) throw std::invalid_argument("grid size must be >= 1");
    const std::size_t per_cell = quad_.size();
    const std::size_t entries = per_cell * cells_of(n);
    if (u0_.is_constant() && u1_.is_constant()) return;
    if (entries > opts_.max_cached_entries) return;
    plan_x1_.resize(entries);
    plan_x2_.resize(entries);
    plan_w_.resize(entries);
    parallel_for(cells_of(n), opts_.threads, [&](std::size_t c) {
        std::size_t e = c * per_cell;
        try {
            visit_nodes(Vec2{(c / n + 0.5) / n, (c % n + 0.5) / n},
                        [&](const Vec2& p, double w) {
                            plan_x1_[e] = p.x1;
                            plan_x2_[e] = p.x2;
                            plan_w_[e] = w;
                            ++e;
                        });
        } catch (const NumericalError& err) {
            throw IntegrationError(std::string(err.what()) + " (cell " + std::to_string(c) + ")");
        }
    });
    plan_offsets_.resize(cells_of(n) + 1);
    for (std::size_t c = 0; c <= cells_of(n); ++c) plan_offsets_[c] = c * per_cell;
}

template <class Visit>
void TransferOperator::visit_nodes(const Vec2& x, Visit&& visit) const {
    const Rule1D& sr = quad_.s();
    const Rule1D& tr = quad_.t();
    if (u0_.is_constant() && u1_.is_constant()) {
        const Vec2 a = u0_.base(), b = u1_.base();
        for (std::size_t j = 0; j < tr.size(); ++j) {
            const Vec2 y = x - tr.nodes[j] * a;
            for (std::size_t i = 0; i < sr.size(); ++i) visit(y - sr.nodes[i] * b, tr.weights[j] * sr.weights[i]);
        }
        return;
    }
    const double step = opts_.flow.max_step;
    sweep_inverse_scalar(u0_, x, tr.nodes, step, [&](std::size_t j, const ScalarState& a) {
        const double wt = tr.weights[j] * std::exp(a.log_det);
        sweep_inverse_scalar(u1_, a.y, sr.nodes, step, [&](std::size_t i, const ScalarState& b) {
            visit(b.y, wt * sr.weights[i] * std::exp(b.log_det));
        });
    });
}

double TransferOperator::apply_at(const PeriodicSpline& h, const Vec2& x) const {
    double sum = 0.0;
    visit_nodes(x, [&](const Vec2& p, double w) { sum += w * h(p); });
    return sum;
}

double TransferOperator::apply_at(const std::function<double(const Vec2&)>& h, const Vec2& x) const {
    double sum = 0.0;
    visit_nodes(x, [&](const Vec2& p, double w) { sum += w * h(p); });
    return sum;
}

DensityGrid TransferOperator::apply(const DensityGrid& h) const {
    check_grid(h, n_);
    const PeriodicSpline sp(h);
    if (cached()) {
        return fill_grid(n_, opts_.threads, [&](std::size_t c) {
            double sum = 0.0;
            for (std::size_t e = plan_offsets_[c]; e < plan_offsets_[c + 1]; ++e)
                sum += plan_w_[e] * sp(Vec2{plan_x1_[e], plan_x2_[e]});
            return sum;
        });
    }
    return fill_grid(n_, opts_.threads, [&](std::size_t c) {
        return apply_at(sp, Vec2{(c / n_ + 0.5) / n_, (c % n_ + 0.5) / n_});
    });
}

SingleSwitchOperator::SingleSwitchOperator(const VectorFieldSpec& field, Rule1D rule, int n, TransferOptions opts)
    : field_(field), rule_(std::move(rule)), n_(n), opts_(opts) {
    if (n < 1) throw std::invalid_argument("grid size must be >= 1");
    const std::size_t per_cell = rule_.size();
    const std::size_t entries = per_cell * cells_of(n);
    if (field_.is_constant() || entries > opts_.max_cached_entries) return;
    plan_x1_.resize(entries);
    plan_x2_.resize(entries);
    plan_w_.resize(entries);
    parallel_for(cells_of(n), opts_.threads, [&](std::size_t c) {
        const Vec2 x{(c / n + 0.5) / n, (c % n + 0.5) / n};
        sweep_inverse_scalar(field_, x, rule_.nodes, opts_.flow.max_step, [&](std::size_t k, const ScalarState& s) {
            const std::size_t e = c * per_cell + k;
            plan_x1_[e] = s.y.x1;
            plan_x2_[e] = s.y.x2;
            plan_w_[e] = rule_.weights[k] * std::exp(s.log_det);
        });
    });
}

double SingleSwitchOperator::apply_at(const PeriodicSpline& h, const Vec2& x) const {
    double sum = 0.0;
    if (field_.is_constant()) {
        const Vec2 v = field_.base();
        for (std::size_t k = 0; k < rule_.size(); ++k) sum += rule_.weights[k] * h(x - rule_.nodes[k] * v);
        return sum;
    }
    sweep_inverse_scalar(field_, x, rule_.nodes, opts_.flow.max_step, [&](std::size_t k, const ScalarState& s) {
        sum += rule_.weights[k] * std::exp(s.log_det) * h(s.y);
    });
    return sum;
}

DensityGrid SingleSwitchOperator::apply(const DensityGrid& h) const {
    check_grid(h, n_);
    const PeriodicSpline sp(h);
    if (!plan_w_.empty()) {
        const std::size_t per_cell = rule_.size();
        return fill_grid(n_, opts_.threads, [&](std::size_t c) {
            double sum = 0.0;
            for (std::size_t e = c * per_cell; e < (c + 1) * per_cell; ++e)
                sum += plan_w_[e] * sp(Vec2{plan_x1_[e], plan_x2_[e]});
            return sum;
        });
    }
    return fill_grid(n_, opts_.threads, [&](std::size_t c) {
        return apply_at(sp, Vec2{(c / n_ + 0.5) / n_, (c % n_ + 0.5) / n_});
    });
}

DensityGrid apply_Q(const DensityGrid& h, const VectorFieldSpec& u0, const VectorFieldSpec& u1,
                    const QuadratureRule& quad, const TransferOptions& opts) {
    return TransferOperator(u0, u1, quad, h.n(), opts).apply(h);
}

DensityGrid apply_single_switch(const DensityGrid& h, int i, const FieldPair& fields, const Rule1D& rule,
                                const TransferOptions& opts) {
    if (i != 0 && i != 1) throw std::invalid_argument("single-switch index must be 0 or 1, got " + std::to_string(i));
    return SingleSwitchOperator(i == 0 ? fields.u0 : fields.u1, rule, h.n(), opts).apply(h);
}

SplitTransferOperator::SplitTransferOperator(const FieldPair& fields, const QuadratureRule& quad, int n,
                                             TransferOptions opts)
    : s1_(fields.u1, quad.s(), n, opts), s0_(fields.u0, quad.t(), n, opts) {}

std::vector<SmoothingRow> smoothing_profile(const DensityGrid& h, const FieldPair& fields,
                                            const QuadratureRule& quad, int n_applications,
                                            const TransferOptions& opts) {
    if (n_applications < 0 || n_applications > 5) throw std::invalid_argument("n_applications must be in [0, 5]");
    std::vector<SmoothingRow> rows;
    rows.push_back({0, gradient_l1(h), hessian_l1(h)});
    if (n_applications == 0) return rows;
    const SplitTransferOperator Q(fields, quad, h.n(), opts);
    DensityGrid g = h;
    for (int k = 1; k <= n_applications; ++k) {
        g = Q.apply(g);
        rows.push_back({k, gradient_l1(g), hessian_l1(g)});
    }
    return rows;
}

}  // namespace torswitch
