#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <variant>
#include <vector>

#include "torswitch/jet.hpp"
#include "torswitch/linalg.hpp"
#include "torswitch/torus.hpp"

namespace torswitch {

/// Golden-mean rotation number (sqrt(5) - 1) / 2.
inline const double kAlpha = (std::sqrt(5.0) - 1.0) / 2.0;
/// Silver-mean rotation number sqrt(2) - 1.
inline const double kBeta = std::sqrt(2.0) - 1.0;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Torus diffeomorphism sigma(x) = x + epsilon * p(x) with the trigonometric
/// perturbation
///     p(x) = (a1 sin(2 pi (x2 + phi1)), a2 sin(2 pi (x1 + phi2))).
/// det D sigma = 1 - 4 pi^2 eps^2 a1 a2 cos(.) cos(.), so sigma is a
/// diffeomorphism exactly when epsilon < bound() = 1 / (2 pi sqrt|a1 a2|).
class DiffeoSpec {
public:
    DiffeoSpec() = default;
    explicit DiffeoSpec(double epsilon, Vec2 amplitudes = {1.0, 1.0}, Vec2 phases = {0.0, 0.0});

    static DiffeoSpec identity() { return DiffeoSpec(0.0); }

    double epsilon() const { return epsilon_; }
    const Vec2& amplitudes() const { return amplitudes_; }
    const Vec2& phases() const { return phases_; }
    bool is_identity() const { return epsilon_ == 0.0 || (amplitudes_.x1 == 0.0 && amplitudes_.x2 == 0.0); }

    /// Largest epsilon (exclusive) for which sigma stays a diffeomorphism.
    double bound() const;
    bool is_valid() const { return epsilon_ < bound(); }

    /// sigma on the universal cover.
    Vec2 forward(const Vec2& x) const;
    Mat2 jacobian(const Vec2& x) const;
    double jacobian_det(const Vec2& x) const;
    Vec2 jacobian_det_gradient(const Vec2& x) const;

    /// sigma^{-1}(y) on the cover by damped Newton iteration; throws
    /// DiffeoInversionError when 50 iterations do not reach 1e-13.
    Vec2 inverse(const Vec2& y) const;

    // Off-diagonal entries of D sigma and their derivatives. c1 depends only on
    // x1 (entry (2,1)), c2 only on x2 (entry (1,2)).
    double c1(double x1) const;
    double c2(double x2) const;
    double c1_prime(double x1) const;
    double c2_prime(double x2) const;

private:
    double epsilon_ = 0.0;
    Vec2 amplitudes_{1.0, 1.0};
    Vec2 phases_{0.0, 0.0};
};

/// One Fourier mode of a trigonometric-polynomial field:
///     cos_coef * cos(2 pi k.x) + sin_coef * sin(2 pi k.x).
struct TrigTerm {
    int k1 = 0;
    int k2 = 0;
    Vec2 cos_coef;
    Vec2 sin_coef;
};

/// A smooth vector field on T^2 with analytic value, Jacobian and partial
/// derivatives up to order 4.
class VectorFieldSpec {
public:
    enum class Kind { constant, conjugated, trig };

    static constexpr int kMaxPartialOrder = 4;

    static VectorFieldSpec constant(Vec2 v);
    /// Field u with D sigma(x) u(x) = base. Use make_conjugated_field for the
    /// validated constructor.
    static VectorFieldSpec conjugated_unchecked(Vec2 base, DiffeoSpec sigma);
    static VectorFieldSpec trig(Vec2 mean, std::vector<TrigTerm> terms);

    Kind kind() const;
    bool is_constant() const { return kind() == Kind::constant; }

    /// Constant value (kind constant) or conjugacy base (kind conjugated).
    const Vec2& base() const;
    const DiffeoSpec& sigma() const;
    const Vec2& trig_mean() const;
    const std::vector<TrigTerm>& trig_terms() const;

    Vec2 eval(const Vec2& x) const;
    Mat2 jacobian(const Vec2& x) const;
    /// Value and Jacobian in one pass (shares the trigonometric evaluations).
    std::pair<Vec2, Mat2> eval_and_jacobian(const Vec2& x) const;
    /// d^{n1+n2} u / dx1^{n1} dx2^{n2}, n1 + n2 <= 4.
    Vec2 partial(const Vec2& x, int n1, int n2) const;
    double divergence(const Vec2& x) const;
    /// Gradient of div u.
    Vec2 divergence_gradient(const Vec2& x) const;

    Vec2 eval(const TorusPoint& p) const { return eval(p.lift()); }
    Mat2 jacobian(const TorusPoint& p) const { return jacobian(p.lift()); }

    /// Component jets of the field around x.
    template <int N>
    std::array<Jet<N>, 2> jets(const Vec2& x) const;

private:
    struct Constant { Vec2 v; };
    struct Conjugated { Vec2 base; DiffeoSpec sigma; };
    struct Trig { Vec2 mean; std::vector<TrigTerm> terms; };

    explicit VectorFieldSpec(std::variant<Constant, Conjugated, Trig> data) : data_(std::move(data)) {}

    std::variant<Constant, Conjugated, Trig> data_;
};

/// Conjugate of the constant field `base` under sigma: the returned u satisfies
/// D sigma(x) u(x) = base, so Phi_u^t = sigma^{-1} o (shift by t*base) o sigma
/// and its invariant density is proportional to det D sigma.
/// Throws DiffeoInversionError when sigma fails validation (non-positive
/// Jacobian on a 64x64 grid or a failed inversion round trip).
VectorFieldSpec make_conjugated_field(Vec2 base, const DiffeoSpec& sigma);

/// U(x) = (u1(x), u0(x)) together with its determinant and inverse.
struct DriveMatrix {
    Mat2 U;
    double det = 0.0;
    Mat2 inverse;
};

inline constexpr double kSingularDetThreshold = 1e-12;

/// Throws SingularMatrixError when |det U(x)| < 1e-12.
DriveMatrix eval_drive_matrix(const VectorFieldSpec& u0, const VectorFieldSpec& u1, const Vec2& x);
inline DriveMatrix eval_drive_matrix(const VectorFieldSpec& u0, const VectorFieldSpec& u1,
                                     const TorusPoint& x) {
    return eval_drive_matrix(u0, u1, x.lift());
}

struct TransversalityReport {
    double min_abs_det = 0.0;
    TorusPoint argmin;
    int resolution = 0;
    double threshold = 0.0;
    bool pass = false;
};

/// Minimum of |det U| over the cell centres of a resolution x resolution grid.
/// Never throws on degenerate fields: non-finite determinants count as 0.
TransversalityReport check_transversality(const VectorFieldSpec& u0, const VectorFieldSpec& u1,
                                          int resolution, double threshold = 1e-6);

struct FieldPair {
    VectorFieldSpec u0;
    VectorFieldSpec u1;
};

/// u0 = (1, alpha), u1 = (-beta, 1).
FieldPair constant_pair();

/// Conjugates of the constant pair under two different trigonometric
/// diffeomorphisms of size epsilon (phases 0 and 1/4).
FieldPair conjugated_pair(double epsilon);

}  // namespace torswitch
