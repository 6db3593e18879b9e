#pragma once

// Truncated bivariate Taylor polynomials ("jets"). A Jet<N> stores the
// coefficients c[i][j] of dx1^i dx2^j for i + j <= N around an expansion
// point, which is enough to read off every partial derivative up to order N:
//     d^{i+j} f / dx1^i dx2^j = i! j! c[i][j].

#include <array>
#include <cmath>
#include <stdexcept>

namespace torswitch {

template <int N>
class Jet {
public:
    static constexpr int order = N;

    Jet() { c_.fill(0.0); }

    static Jet constant(double v) {
        Jet j;
        j.at(0, 0) = v;
        return j;
    }

    /// Jet of a function of a single coordinate, given its derivatives
    /// f, f', f'', ... at the expansion point.
    static Jet univariate(const std::array<double, N + 1>& derivs, int axis) {
        Jet j;
        double fact = 1.0;
        for (int k = 0; k <= N; ++k) {
            if (k > 0) fact *= k;
            if (axis == 0)
                j.at(k, 0) = derivs[k] / fact;
            else
                j.at(0, k) = derivs[k] / fact;
        }
        return j;
    }

    double& at(int i, int j) { return c_[i * (N + 1) + j]; }
    double at(int i, int j) const { return c_[i * (N + 1) + j]; }

    double value() const { return at(0, 0); }

    double partial(int n1, int n2) const {
        if (n1 < 0 || n2 < 0 || n1 + n2 > N) throw std::out_of_range("jet order exceeded");
        return factorial(n1) * factorial(n2) * at(n1, n2);
    }

    Jet& operator+=(const Jet& o) {
        for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
        return *this;
    }
    Jet& operator*=(double s) {
        for (double& v : c_) v *= s;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator-(Jet a) { return a *= -1.0; }

    friend Jet operator*(const Jet& a, const Jet& b) {
        Jet r;
        for (int i = 0; i <= N; ++i)
            for (int j = 0; i + j <= N; ++j) {
                double s = 0.0;
                for (int p = 0; p <= i; ++p)
                    for (int q = 0; q <= j; ++q) s += a.at(p, q) * b.at(i - p, j - q);
                r.at(i, j) = s;
            }
        return r;
    }

    /// 1/a via the geometric series in the non-constant part.
    friend Jet reciprocal(const Jet& a) {
        const double a0 = a.value();
        if (a0 == 0.0) throw std::domain_error("jet reciprocal of zero");
        Jet r = a;
        r.at(0, 0) = 0.0;
        r *= -1.0 / a0;  // a = a0 (1 - r)  =>  1/a = (1/a0) sum r^k
        Jet sum = constant(1.0);
        Jet power = constant(1.0);
        for (int k = 1; k <= N; ++k) {
            power = power * r;
            sum += power;
        }
        return sum * (1.0 / a0);
    }

    friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

private:
    static double factorial(int n) {
        double f = 1.0;
        for (int k = 2; k <= n; ++k) f *= k;
        return f;
    }

    std::array<double, (N + 1) * (N + 1)> c_;
};

/// Derivatives of cos(w*y + p) with respect to y, orders 0..N.
template <int N>
std::array<double, N + 1> cos_derivatives(double w, double y, double p) {
    std::array<double, N + 1> d{};
    const double c = std::cos(w * y + p);
    const double s = std::sin(w * y + p);
    double scale = 1.0;
    for (int k = 0; k <= N; ++k) {
        // d^k/dy^k cos = cos, -sin, -cos, sin, ...
        switch (k % 4) {
            case 0: d[k] = scale * c; break;
            case 1: d[k] = -scale * s; break;
            case 2: d[k] = -scale * c; break;
            default: d[k] = scale * s; break;
        }
        scale *= w;
    }
    return d;
}

}  // namespace torswitch
