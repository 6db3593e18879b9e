#pragma once

#include <cmath>

#include "torswitch/linalg.hpp"

namespace torswitch {

/// Reduce a real number into [0, 1).
inline double wrap_unit(double v) {
    double r = v - std::floor(v);
    // floor can round v - floor(v) up to exactly 1 for tiny negative v
    if (r >= 1.0) r = 0.0;
    return r;
}

/// Shortest representative of a coordinate difference, in [-1/2, 1/2).
inline double shortest_offset(double d) {
    return d - std::floor(d + 0.5);
}

/// A point of T^2 = R^2 / Z^2, stored as its representative in [0,1)^2.
class TorusPoint {
public:
    TorusPoint() = default;
    TorusPoint(double x1, double x2) : x1_(wrap_unit(x1)), x2_(wrap_unit(x2)) {}
    explicit TorusPoint(const Vec2& lift) : TorusPoint(lift.x1, lift.x2) {}

    double x1() const { return x1_; }
    double x2() const { return x2_; }

    /// Representative in [0,1)^2 as a point of the universal cover.
    Vec2 lift() const { return {x1_, x2_}; }

    TorusPoint operator+(const Vec2& d) const { return TorusPoint(x1_ + d.x1, x2_ + d.x2); }
    TorusPoint operator-(const Vec2& d) const { return TorusPoint(x1_ - d.x1, x2_ - d.x2); }

    friend bool operator==(const TorusPoint& a, const TorusPoint& b) {
        return a.x1_ == b.x1_ && a.x2_ == b.x2_;
    }

private:
    double x1_ = 0.0;
    double x2_ = 0.0;
};

/// Displacement from a to b along the shortest path on the torus.
inline Vec2 displacement(const TorusPoint& a, const TorusPoint& b) {
    return {shortest_offset(b.x1() - a.x1()), shortest_offset(b.x2() - a.x2())};
}

inline double distance(const TorusPoint& a, const TorusPoint& b) {
    return norm(displacement(a, b));
}

}  // namespace torswitch
