#pragma once

// Fixed-size 2-vectors and 2x2 matrices. Everything in this library lives in
// two dimensions, so a general linear algebra package would be overkill.

#include <cmath>
#include <ostream>

namespace torswitch {

struct Vec2 {
    double x1 = 0.0;
    double x2 = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double a, double b) : x1(a), x2(b) {}

    constexpr double operator[](int i) const { return i == 0 ? x1 : x2; }
    constexpr double& operator[](int i) { return i == 0 ? x1 : x2; }

    constexpr Vec2& operator+=(const Vec2& o) { x1 += o.x1; x2 += o.x2; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x1 -= o.x1; x2 -= o.x2; return *this; }
    constexpr Vec2& operator*=(double s) { x1 *= s; x2 *= s; return *this; }
};

constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
constexpr Vec2 operator-(const Vec2& a) { return {-a.x1, -a.x2}; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x1 * b.x1 + a.x2 * b.x2; }
inline double norm(const Vec2& a) { return std::hypot(a.x1, a.x2); }

/// Row-major 2x2 matrix [[a11, a12], [a21, a22]].
struct Mat2 {
    double a11 = 0.0, a12 = 0.0;
    double a21 = 0.0, a22 = 0.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 from_columns(const Vec2& c1, const Vec2& c2) {
        return {c1.x1, c2.x1, c1.x2, c2.x2};
    }

    constexpr Vec2 col(int j) const { return j == 0 ? Vec2{a11, a21} : Vec2{a12, a22}; }
    constexpr Vec2 row(int i) const { return i == 0 ? Vec2{a11, a12} : Vec2{a21, a22}; }
    constexpr double det() const { return a11 * a22 - a12 * a21; }
    constexpr double trace() const { return a11 + a22; }
    constexpr Mat2 transpose() const { return {a11, a21, a12, a22}; }

    /// Inverse by the adjugate formula; caller checks det() != 0.
    constexpr Mat2 inverse() const {
        const double d = det();
        return {a22 / d, -a12 / d, -a21 / d, a11 / d};
    }

    double max_abs() const {
        return std::fmax(std::fmax(std::fabs(a11), std::fabs(a12)),
                         std::fmax(std::fabs(a21), std::fabs(a22)));
    }

    constexpr Mat2& operator+=(const Mat2& o) {
        a11 += o.a11; a12 += o.a12; a21 += o.a21; a22 += o.a22;
        return *this;
    }
    constexpr Mat2& operator-=(const Mat2& o) {
        a11 -= o.a11; a12 -= o.a12; a21 -= o.a21; a22 -= o.a22;
        return *this;
    }
    constexpr Mat2& operator*=(double s) {
        a11 *= s; a12 *= s; a21 *= s; a22 *= s;
        return *this;
    }
};

constexpr Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
constexpr Mat2 operator-(Mat2 a, const Mat2& b) { return a -= b; }
constexpr Mat2 operator*(double s, Mat2 a) { return a *= s; }

constexpr Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}

constexpr Vec2 operator*(const Mat2& a, const Vec2& v) {
    return {a.a11 * v.x1 + a.a12 * v.x2, a.a21 * v.x1 + a.a22 * v.x2};
}

/// Row vector times matrix: (v^T A)^T.
constexpr Vec2 row_times(const Vec2& v, const Mat2& a) {
    return {v.x1 * a.a11 + v.x2 * a.a21, v.x1 * a.a12 + v.x2 * a.a22};
}

inline double frobenius(const Mat2& a) {
    return std::sqrt(a.a11 * a.a11 + a.a12 * a.a12 + a.a21 * a.a21 + a.a22 * a.a22);
}

inline std::ostream& operator<<(std::ostream& os, const Vec2& v) {
    return os << '(' << v.x1 << ", " << v.x2 << ')';
}

inline std::ostream& operator<<(std::ostream& os, const Mat2& m) {
    return os << "[[" << m.a11 << ", " << m.a12 << "], [" << m.a21 << ", " << m.a22 << "]]";
}

}  // namespace torswitch
