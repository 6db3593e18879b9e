#include "torswitch/density_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "torswitch/errors.hpp"

namespace torswitch {

namespace {

void require_same(const DensityGrid& a, const DensityGrid& b) {
    if (a.n() != b.n()) throw std::invalid_argument("grid sizes differ");
}

int wrap_index(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

// Periodic cubic B-spline prefilter along a strided line of length n (in place):
// solves (c[k-1] + 4 c[k] + c[k+1]) / 6 = f[k] with periodic wrap.
void prefilter_line(double* f, int n, std::size_t stride) {
    const double z = std::sqrt(3.0) - 2.0;
    const double zn = std::pow(z, n);
    auto at = [&](int k) -> double& { return f[static_cast<std::size_t>(k) * stride]; };
    // causal pass, initialised with the full periodic sum
    double acc = 0.0, zk = 1.0;
    for (int i = 0; i < n; ++i) {
        acc += zk * at(wrap_index(-i, n));
        zk *= z;
    }
    at(0) = acc / (1.0 - zn);
    for (int k = 1; k < n; ++k) at(k) += z * at(k - 1);
    // anti-causal pass
    acc = 0.0;
    zk = 1.0;
    for (int i = 0; i < n; ++i) {
        acc += zk * at(wrap_index(n - 1 + i, n));
        zk *= z;
    }
    at(n - 1) = -z * acc / (1.0 - zn);
    for (int k = n - 2; k >= 0; --k) at(k) = z * (at(k + 1) - at(k));
    for (int k = 0; k < n; ++k) at(k) *= 6.0;
}

inline void bspline_weights(double t, double w[4]) {
    const double t2 = t * t, t3 = t2 * t;
    const double u = 1.0 - t;
    w[0] = u * u * u / 6.0;
    w[1] = (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0;
    w[2] = (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0;
    w[3] = t3 / 6.0;
}

inline void bspline_derivative_weights(double t, double w[4]) {
    const double t2 = t * t;
    w[0] = -0.5 * (1.0 - t) * (1.0 - t);
    w[1] = 1.5 * t2 - 2.0 * t;
    w[2] = -1.5 * t2 + t + 0.5;
    w[3] = 0.5 * t2;
}

}  // namespace

DensityGrid::DensityGrid(int n, double fill) : n_(n) {
    if (n < 1) throw std::invalid_argument("grid size must be >= 1");
    values_.assign(static_cast<std::size_t>(n) * n, fill);
}

DensityGrid::DensityGrid(int n, std::vector<double> values) : n_(n), values_(std::move(values)) {
    if (n < 1) throw std::invalid_argument("grid size must be >= 1");
    if (values_.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("grid value count does not match n*n");
}

DensityGrid DensityGrid::from_function(int n, const std::function<double(const Vec2&)>& f) {
    DensityGrid g(n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) g(j, k) = f(g.cell_center(j, k));
    return g;
}

double DensityGrid::wrapped(int j, int k) const { return (*this)(wrap_index(j, n_), wrap_index(k, n_)); }

double DensityGrid::mass() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s / (static_cast<double>(n_) * n_);
}

double DensityGrid::l1_norm() const {
    double s = 0.0;
    for (double v : values_) s += std::abs(v);
    return s / (static_cast<double>(n_) * n_);
}

double DensityGrid::min() const { return *std::min_element(values_.begin(), values_.end()); }
double DensityGrid::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool DensityGrid::nonnegative(double tol) const {
    return std::all_of(values_.begin(), values_.end(), [tol](double v) { return v >= -tol; });
}

void DensityGrid::normalize() {
    const double m = mass();
    if (!(m > 0.0) || !std::isfinite(m)) throw NumericalError("cannot normalize grid with mass " + std::to_string(m));
    for (double& v : values_) v /= m;
}

DensityGrid& DensityGrid::operator+=(const DensityGrid& o) {
    require_same(*this, o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

DensityGrid& DensityGrid::operator-=(const DensityGrid& o) {
    require_same(*this, o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
}

DensityGrid& DensityGrid::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

double l1_distance(const DensityGrid& a, const DensityGrid& b) {
    require_same(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.values()[i] - b.values()[i]);
    return s / (static_cast<double>(a.n()) * a.n());
}

double max_deviation(const DensityGrid& a, double value) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::abs(v - value));
    return m;
}

PeriodicSpline::PeriodicSpline(const DensityGrid& grid) : n_(grid.n()), coef_(grid.values()) {
    const std::size_t n = static_cast<std::size_t>(n_);
    for (std::size_t j = 0; j < n; ++j) prefilter_line(&coef_[j * n], n_, 1);
    for (std::size_t k = 0; k < n; ++k) prefilter_line(&coef_[k], n_, n);
}

double PeriodicSpline::operator()(const Vec2& x) const {
    const double u = x.x1 * n_ - 0.5, v = x.x2 * n_ - 0.5;
    const double fu = std::floor(u), fv = std::floor(v);
    double wu[4], wv[4];
    bspline_weights(u - fu, wu);
    bspline_weights(v - fv, wv);
    int iu = wrap_index(static_cast<int>(static_cast<long long>(fu) % n_) - 1, n_);
    const int iv0 = wrap_index(static_cast<int>(static_cast<long long>(fv) % n_) - 1, n_);
    double sum = 0.0;
    for (int a = 0; a < 4; ++a) {
        const double* row = &coef_[static_cast<std::size_t>(iu) * n_];
        int iv = iv0;
        double rs = 0.0;
        for (int b = 0; b < 4; ++b) {
            rs += wv[b] * row[iv];
            if (++iv == n_) iv = 0;
        }
        sum += wu[a] * rs;
        if (++iu == n_) iu = 0;
    }
    return sum;
}

Vec2 PeriodicSpline::gradient(const Vec2& x) const {
    const double u = x.x1 * n_ - 0.5, v = x.x2 * n_ - 0.5;
    const double fu = std::floor(u), fv = std::floor(v);
    double wu[4], wv[4], du[4], dv[4];
    bspline_weights(u - fu, wu);
    bspline_weights(v - fv, wv);
    bspline_derivative_weights(u - fu, du);
    bspline_derivative_weights(v - fv, dv);
    const int iu0 = wrap_index(static_cast<int>(static_cast<long long>(fu) % n_) - 1, n_);
    const int iv0 = wrap_index(static_cast<int>(static_cast<long long>(fv) % n_) - 1, n_);
    double g1 = 0.0, g2 = 0.0;
    for (int a = 0; a < 4; ++a) {
        const double* row = &coef_[static_cast<std::size_t>(wrap_index(iu0 + a, n_)) * n_];
        double rv = 0.0, rd = 0.0;
        for (int b = 0; b < 4; ++b) {
            const double c = row[wrap_index(iv0 + b, n_)];
            rv += wv[b] * c;
            rd += dv[b] * c;
        }
        g1 += du[a] * rv;
        g2 += wu[a] * rd;
    }
    return {g1 * n_, g2 * n_};
}

DensityGrid grid_partial(const DensityGrid& f, int axis) {
    if (axis != 0 && axis != 1) throw std::invalid_argument("axis must be 0 or 1");
    const int n = f.n();
    DensityGrid d(n);
    const double s = 0.5 * n;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            d(j, k) = axis == 0 ? s * (f.wrapped(j + 1, k) - f.wrapped(j - 1, k))
                                : s * (f.wrapped(j, k + 1) - f.wrapped(j, k - 1));
    return d;
}

double gradient_l1(const DensityGrid& f) {
    const DensityGrid d1 = grid_partial(f, 0), d2 = grid_partial(f, 1);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::hypot(d1.values()[i], d2.values()[i]);
    return s / (static_cast<double>(f.n()) * f.n());
}

double hessian_l1(const DensityGrid& f) {
    const int n = f.n();
    const double h2 = static_cast<double>(n) * n;
    double s = 0.0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            const double c = f(j, k);
            const double fxx = (f.wrapped(j + 1, k) - 2.0 * c + f.wrapped(j - 1, k)) * h2;
            const double fyy = (f.wrapped(j, k + 1) - 2.0 * c + f.wrapped(j, k - 1)) * h2;
            const double fxy = (f.wrapped(j + 1, k + 1) - f.wrapped(j + 1, k - 1) - f.wrapped(j - 1, k + 1) +
                                f.wrapped(j - 1, k - 1)) * 0.25 * h2;
            const double mean = 0.5 * (fxx + fyy);
            const double rad = std::hypot(0.5 * (fxx - fyy), fxy);
            s += std::abs(mean) + rad;
        }
    return s / h2;
}

double direction_sup_l1(const DensityGrid& d1, const DensityGrid& d2) {
    require_same(d1, d2);
    const double r = 1.0 / std::sqrt(2.0);
    double s = 0.0;
    for (std::size_t i = 0; i < d1.size(); ++i) {
        const double a = d1.values()[i], b = d2.values()[i];
        s += std::max({std::abs(a), std::abs(b), std::abs(a + b) * r, std::abs(a - b) * r});
    }
    return s / (static_cast<double>(d1.n()) * d1.n());
}

DensityGrid resample(const DensityGrid& f, int m) {
    const PeriodicSpline sp(f);
    return DensityGrid::from_function(m, [&](const Vec2& x) { return sp(x); });
}

}  // namespace torswitch
