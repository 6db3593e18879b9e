#include "torswitch/vector_fields.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "torswitch/errors.hpp"

namespace torswitch {

// ---------------------------------------------------------------------------
// DiffeoSpec
// ---------------------------------------------------------------------------

DiffeoSpec::DiffeoSpec(double epsilon, Vec2 amplitudes, Vec2 phases)
    : epsilon_(epsilon), amplitudes_(amplitudes), phases_(phases) {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
        throw std::invalid_argument("diffeomorphism epsilon must be finite and >= 0");
    if (!std::isfinite(amplitudes.x1) || !std::isfinite(amplitudes.x2) || !std::isfinite(phases.x1) ||
        !std::isfinite(phases.x2))
        throw std::invalid_argument("diffeomorphism amplitudes/phases must be finite");
}

double DiffeoSpec::bound() const {
    const double prod = std::fabs(amplitudes_.x1 * amplitudes_.x2);
    if (prod == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (kTwoPi * std::sqrt(prod));
}

double DiffeoSpec::c1(double x1) const {
    return kTwoPi * epsilon_ * amplitudes_.x2 * std::cos(kTwoPi * (x1 + phases_.x2));
}
double DiffeoSpec::c2(double x2) const {
    return kTwoPi * epsilon_ * amplitudes_.x1 * std::cos(kTwoPi * (x2 + phases_.x1));
}
double DiffeoSpec::c1_prime(double x1) const {
    return -kTwoPi * kTwoPi * epsilon_ * amplitudes_.x2 * std::sin(kTwoPi * (x1 + phases_.x2));
}
double DiffeoSpec::c2_prime(double x2) const {
    return -kTwoPi * kTwoPi * epsilon_ * amplitudes_.x1 * std::sin(kTwoPi * (x2 + phases_.x1));
}

Vec2 DiffeoSpec::forward(const Vec2& x) const {
    return {x.x1 + epsilon_ * amplitudes_.x1 * std::sin(kTwoPi * (x.x2 + phases_.x1)),
            x.x2 + epsilon_ * amplitudes_.x2 * std::sin(kTwoPi * (x.x1 + phases_.x2))};
}

Mat2 DiffeoSpec::jacobian(const Vec2& x) const { return {1.0, c2(x.x2), c1(x.x1), 1.0}; }

double DiffeoSpec::jacobian_det(const Vec2& x) const { return 1.0 - c1(x.x1) * c2(x.x2); }

Vec2 DiffeoSpec::jacobian_det_gradient(const Vec2& x) const {
    return {-c1_prime(x.x1) * c2(x.x2), -c1(x.x1) * c2_prime(x.x2)};
}

Vec2 DiffeoSpec::inverse(const Vec2& y) const {
    if (is_identity()) return y;
    constexpr int kMaxIter = 50;
    constexpr double kTol = 1e-13;
    auto residual = [&](const Vec2& x) { return forward(x) - y; };
    auto size = [](const Vec2& r) { return std::fmax(std::fabs(r.x1), std::fabs(r.x2)); };

    Vec2 x = y - (forward(y) - y);  // one Picard step as the starting guess
    Vec2 r = residual(x);
    for (int it = 0; it < kMaxIter; ++it) {
        if (size(r) < kTol) return x;
        const Mat2 J = jacobian(x);
        const double d = J.det();
        if (!(std::fabs(d) > 0.0)) break;
        const Vec2 step = J.inverse() * r;
        double damping = 1.0;
        Vec2 trial = x - step;
        Vec2 r_trial = residual(trial);
        while (size(r_trial) >= size(r) && damping > 1.0 / 64.0) {
            damping *= 0.5;
            trial = x - damping * step;
            r_trial = residual(trial);
        }
        x = trial;
        r = r_trial;
    }
    if (size(r) < kTol) return x;
    throw DiffeoInversionError("sigma inversion did not converge at y=(" + std::to_string(y.x1) + ", " +
                               std::to_string(y.x2) + ")");
}

// ---------------------------------------------------------------------------
// VectorFieldSpec
// ---------------------------------------------------------------------------

VectorFieldSpec VectorFieldSpec::constant(Vec2 v) { return VectorFieldSpec(Constant{v}); }

VectorFieldSpec VectorFieldSpec::conjugated_unchecked(Vec2 base, DiffeoSpec sigma) {
    return VectorFieldSpec(Conjugated{base, sigma});
}

VectorFieldSpec VectorFieldSpec::trig(Vec2 mean, std::vector<TrigTerm> terms) {
    return VectorFieldSpec(Trig{mean, std::move(terms)});
}

VectorFieldSpec::Kind VectorFieldSpec::kind() const {
    switch (data_.index()) {
        case 0: return Kind::constant;
        case 1: return Kind::conjugated;
        default: return Kind::trig;
    }
}

const Vec2& VectorFieldSpec::base() const {
    if (const auto* c = std::get_if<Constant>(&data_)) return c->v;
    if (const auto* c = std::get_if<Conjugated>(&data_)) return c->base;
    throw std::logic_error("trigonometric field has no base vector");
}

const DiffeoSpec& VectorFieldSpec::sigma() const {
    if (const auto* c = std::get_if<Conjugated>(&data_)) return c->sigma;
    throw std::logic_error("field is not conjugated");
}

const Vec2& VectorFieldSpec::trig_mean() const { return std::get<Trig>(data_).mean; }
const std::vector<TrigTerm>& VectorFieldSpec::trig_terms() const { return std::get<Trig>(data_).terms; }

Vec2 VectorFieldSpec::eval(const Vec2& x) const {
    switch (data_.index()) {
        case 0: return std::get<Constant>(data_).v;
        case 1: {
            const auto& f = std::get<Conjugated>(data_);
            const double c1 = f.sigma.c1(x.x1);
            const double c2 = f.sigma.c2(x.x2);
            const double d = 1.0 - c1 * c2;
            return {(f.base.x1 - c2 * f.base.x2) / d, (f.base.x2 - c1 * f.base.x1) / d};
        }
        default: {
            const auto& f = std::get<Trig>(data_);
            Vec2 u = f.mean;
            for (const auto& term : f.terms) {
                const double th = kTwoPi * (term.k1 * x.x1 + term.k2 * x.x2);
                u += std::cos(th) * term.cos_coef + std::sin(th) * term.sin_coef;
            }
            return u;
        }
    }
}

Mat2 VectorFieldSpec::jacobian(const Vec2& x) const {
    switch (data_.index()) {
        case 0: return {};
        case 1: {
            const auto& f = std::get<Conjugated>(data_);
            const double c1 = f.sigma.c1(x.x1);
            const double c2 = f.sigma.c2(x.x2);
            const double dc1 = f.sigma.c1_prime(x.x1);
            const double dc2 = f.sigma.c2_prime(x.x2);
            const double d = 1.0 - c1 * c2;
            const double u1 = (f.base.x1 - c2 * f.base.x2) / d;
            const double u2 = (f.base.x2 - c1 * f.base.x1) / d;
            const double d_1 = -dc1 * c2;  // dd/dx1
            const double d_2 = -c1 * dc2;  // dd/dx2
            return {-u1 * d_1 / d, (-dc2 * f.base.x2 - u1 * d_2) / d,
                    (-dc1 * f.base.x1 - u2 * d_1) / d, -u2 * d_2 / d};
        }
        default: {
            const auto& f = std::get<Trig>(data_);
            Mat2 J;
            for (const auto& term : f.terms) {
                const double th = kTwoPi * (term.k1 * x.x1 + term.k2 * x.x2);
                // d/dth of (a cos + b sin) = -a sin + b cos
                const Vec2 g = -std::sin(th) * term.cos_coef + std::cos(th) * term.sin_coef;
                const double w1 = kTwoPi * term.k1;
                const double w2 = kTwoPi * term.k2;
                J += Mat2{g.x1 * w1, g.x1 * w2, g.x2 * w1, g.x2 * w2};
            }
            return J;
        }
    }
}

std::pair<Vec2, Mat2> VectorFieldSpec::eval_and_jacobian(const Vec2& x) const {
    if (data_.index() != 1) return {eval(x), jacobian(x)};
    const auto& f = std::get<Conjugated>(data_);
    const DiffeoSpec& s = f.sigma;
    const double th1 = kTwoPi * (x.x1 + s.phases().x2);
    const double th2 = kTwoPi * (x.x2 + s.phases().x1);
    const double k1 = kTwoPi * s.epsilon() * s.amplitudes().x2;
    const double k2 = kTwoPi * s.epsilon() * s.amplitudes().x1;
    const double c1 = k1 * std::cos(th1);
    const double c2 = k2 * std::cos(th2);
    const double dc1 = -kTwoPi * k1 * std::sin(th1);
    const double dc2 = -kTwoPi * k2 * std::sin(th2);
    const double d = 1.0 - c1 * c2;
    const double u1 = (f.base.x1 - c2 * f.base.x2) / d;
    const double u2 = (f.base.x2 - c1 * f.base.x1) / d;
    const double d_1 = -dc1 * c2;
    const double d_2 = -c1 * dc2;
    return {{u1, u2},
            {-u1 * d_1 / d, (-dc2 * f.base.x2 - u1 * d_2) / d, (-dc1 * f.base.x1 - u2 * d_1) / d, -u2 * d_2 / d}};
}

template <int N>
std::array<Jet<N>, 2> VectorFieldSpec::jets(const Vec2& x) const {
    switch (data_.index()) {
        case 0: {
            const Vec2 v = std::get<Constant>(data_).v;
            return {Jet<N>::constant(v.x1), Jet<N>::constant(v.x2)};
        }
        case 1: {
            const auto& f = std::get<Conjugated>(data_);
            const DiffeoSpec& s = f.sigma;
            auto c1d = cos_derivatives<N>(kTwoPi, x.x1, kTwoPi * s.phases().x2);
            auto c2d = cos_derivatives<N>(kTwoPi, x.x2, kTwoPi * s.phases().x1);
            for (double& v : c1d) v *= kTwoPi * s.epsilon() * s.amplitudes().x2;
            for (double& v : c2d) v *= kTwoPi * s.epsilon() * s.amplitudes().x1;
            const Jet<N> c1 = Jet<N>::univariate(c1d, 0);
            const Jet<N> c2 = Jet<N>::univariate(c2d, 1);
            const Jet<N> inv_d = reciprocal(Jet<N>::constant(1.0) - c1 * c2);
            return {(Jet<N>::constant(f.base.x1) - f.base.x2 * c2) * inv_d,
                    (Jet<N>::constant(f.base.x2) - f.base.x1 * c1) * inv_d};
        }
        default: {
            const auto& f = std::get<Trig>(data_);
            std::array<Jet<N>, 2> out{Jet<N>::constant(f.mean.x1), Jet<N>::constant(f.mean.x2)};
            for (const auto& term : f.terms) {
                const double th = kTwoPi * (term.k1 * x.x1 + term.k2 * x.x2);
                const double c = std::cos(th);
                const double s = std::sin(th);
                const double w1 = kTwoPi * term.k1;
                const double w2 = kTwoPi * term.k2;
                double fi = 1.0;
                for (int i = 0; i <= N; ++i) {
                    if (i > 0) fi *= i;
                    double fj = 1.0;
                    for (int j = 0; i + j <= N; ++j) {
                        if (j > 0) fj *= j;
                        const int n = i + j;
                        // n-th derivative of cos and sin with respect to th
                        double dc = 0.0, ds = 0.0;
                        switch (n % 4) {
                            case 0: dc = c; ds = s; break;
                            case 1: dc = -s; ds = c; break;
                            case 2: dc = -c; ds = -s; break;
                            default: dc = s; ds = -c; break;
                        }
                        const double scale = std::pow(w1, i) * std::pow(w2, j) / (fi * fj);
                        out[0].at(i, j) += scale * (dc * term.cos_coef.x1 + ds * term.sin_coef.x1);
                        out[1].at(i, j) += scale * (dc * term.cos_coef.x2 + ds * term.sin_coef.x2);
                    }
                }
            }
            return out;
        }
    }
}

template std::array<Jet<2>, 2> VectorFieldSpec::jets<2>(const Vec2&) const;
template std::array<Jet<4>, 2> VectorFieldSpec::jets<4>(const Vec2&) const;

Vec2 VectorFieldSpec::partial(const Vec2& x, int n1, int n2) const {
    if (n1 < 0 || n2 < 0 || n1 + n2 > kMaxPartialOrder)
        throw std::invalid_argument("partial derivatives are supported up to order 4");
    if (n1 + n2 == 0) return eval(x);
    if (kind() == Kind::constant) return {};
    const auto j = jets<kMaxPartialOrder>(x);
    return {j[0].partial(n1, n2), j[1].partial(n1, n2)};
}

double VectorFieldSpec::divergence(const Vec2& x) const { return jacobian(x).trace(); }

Vec2 VectorFieldSpec::divergence_gradient(const Vec2& x) const {
    if (kind() == Kind::constant) return {};
    const auto j = jets<2>(x);
    // div u = d1 u1 + d2 u2
    return {j[0].partial(2, 0) + j[1].partial(1, 1), j[0].partial(1, 1) + j[1].partial(0, 2)};
}

// ---------------------------------------------------------------------------
// Constructors and checks
// ---------------------------------------------------------------------------

VectorFieldSpec make_conjugated_field(Vec2 base, const DiffeoSpec& sigma) {
    constexpr int kGrid = 64;
    for (int j = 0; j < kGrid; ++j)
        for (int k = 0; k < kGrid; ++k) {
            const Vec2 x{(j + 0.5) / kGrid, (k + 0.5) / kGrid};
            if (!(sigma.jacobian_det(x) > 0.0))
                throw DiffeoInversionError("sigma has non-positive Jacobian determinant at (" +
                                           std::to_string(x.x1) + ", " + std::to_string(x.x2) + ")");
        }
    for (int j = 0; j < 8; ++j) {
        const Vec2 x{(j + 0.25) / 8.0, (7 - j + 0.6) / 8.0};
        const Vec2 back = sigma.inverse(sigma.forward(x));
        if (norm(back - x) > 1e-12) throw DiffeoInversionError("sigma inversion round trip failed");
    }
    return VectorFieldSpec::conjugated_unchecked(base, sigma);
}

DriveMatrix eval_drive_matrix(const VectorFieldSpec& u0, const VectorFieldSpec& u1, const Vec2& x) {
    DriveMatrix m;
    m.U = Mat2::from_columns(u1.eval(x), u0.eval(x));
    m.det = m.U.det();
    if (!(std::fabs(m.det) >= kSingularDetThreshold))
        throw SingularMatrixError("transversality violated: |det U| = " + std::to_string(std::fabs(m.det)) +
                                  " at (" + std::to_string(x.x1) + ", " + std::to_string(x.x2) + ")");
    m.inverse = m.U.inverse();
    return m;
}

TransversalityReport check_transversality(const VectorFieldSpec& u0, const VectorFieldSpec& u1, int resolution,
                                          double threshold) {
    if (resolution < 16) throw std::invalid_argument("transversality grid resolution must be >= 16");
    TransversalityReport rep;
    rep.resolution = resolution;
    rep.threshold = threshold;
    rep.min_abs_det = std::numeric_limits<double>::infinity();
    for (int j = 0; j < resolution; ++j)
        for (int k = 0; k < resolution; ++k) {
            const Vec2 x{(j + 0.5) / resolution, (k + 0.5) / resolution};
            double d = std::fabs(Mat2::from_columns(u1.eval(x), u0.eval(x)).det());
            if (!std::isfinite(d)) d = 0.0;
            if (d < rep.min_abs_det) {
                rep.min_abs_det = d;
                rep.argmin = TorusPoint(x);
            }
        }
    rep.pass = rep.min_abs_det > threshold;
    return rep;
}

FieldPair constant_pair() {
    return {VectorFieldSpec::constant({1.0, kAlpha}), VectorFieldSpec::constant({-kBeta, 1.0})};
}

FieldPair conjugated_pair(double epsilon) {
    return {make_conjugated_field({1.0, kAlpha}, DiffeoSpec(epsilon, {1.0, 1.0}, {0.0, 0.0})),
            make_conjugated_field({-kBeta, 1.0}, DiffeoSpec(epsilon, {1.0, 1.0}, {0.25, 0.25}))};
}

}  // namespace torswitch
