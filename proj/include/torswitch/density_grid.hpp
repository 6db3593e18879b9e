#pragma once

#include <functional>
#include <vector>

#include "torswitch/linalg.hpp"
#include "torswitch/torus.hpp"

namespace torswitch {

/// n x n periodic grid; cell (j, k) is centred at ((j + 1/2)/n, (k + 1/2)/n)
/// and stored at values[j * n + k]. Used both for densities (nonnegative,
/// unit mass) and for signed test functions.
class DensityGrid {
public:
    DensityGrid() = default;
    explicit DensityGrid(int n, double fill = 0.0);
    DensityGrid(int n, std::vector<double> values);

    static DensityGrid uniform(int n) { return DensityGrid(n, 1.0); }
    /// Samples f at the cell centres.
    static DensityGrid from_function(int n, const std::function<double(const Vec2&)>& f);

    int n() const { return n_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double& operator()(int j, int k) { return values_[static_cast<std::size_t>(j) * n_ + k]; }
    double operator()(int j, int k) const { return values_[static_cast<std::size_t>(j) * n_ + k]; }
    /// Periodic index access.
    double wrapped(int j, int k) const;

    Vec2 cell_center(int j, int k) const { return {(j + 0.5) / n_, (k + 0.5) / n_}; }
    Vec2 cell_center(std::size_t index) const {
        return cell_center(static_cast<int>(index / n_), static_cast<int>(index % n_));
    }

    /// (1/n^2) sum of values.
    double mass() const;
    double l1_norm() const;
    double min() const;
    double max() const;
    /// True when every value is >= -tol.
    bool nonnegative(double tol = 0.0) const;
    /// Scales to unit mass; throws NumericalError when the mass is not positive.
    void normalize();

    DensityGrid& operator+=(const DensityGrid& o);
    DensityGrid& operator-=(const DensityGrid& o);
    DensityGrid& operator*=(double s);
    friend DensityGrid operator+(DensityGrid a, const DensityGrid& b) { return a += b; }
    friend DensityGrid operator-(DensityGrid a, const DensityGrid& b) { return a -= b; }
    friend DensityGrid operator*(DensityGrid a, double s) { return a *= s; }
    friend DensityGrid operator*(double s, DensityGrid a) { return a *= s; }

private:
    int n_ = 0;
    std::vector<double> values_;
};

/// (1/n^2) sum |a - b|. Grids must have equal size.
double l1_distance(const DensityGrid& a, const DensityGrid& b);
/// max over cells of |a - value|.
double max_deviation(const DensityGrid& a, double value);

/// Periodic tensor-product cubic B-spline interpolating a grid at its cell
/// centres. C^2, so it serves as the differentiable surrogate of a grid.
class PeriodicSpline {
public:
    PeriodicSpline() = default;
    explicit PeriodicSpline(const DensityGrid& grid);

    int n() const { return n_; }
    double operator()(const Vec2& x) const;
    double operator()(const TorusPoint& p) const { return (*this)(p.lift()); }
    Vec2 gradient(const Vec2& x) const;

private:
    int n_ = 0;
    std::vector<double> coef_;
};

/// Centred-difference partial derivatives of a grid (periodic), axis 0 or 1.
DensityGrid grid_partial(const DensityGrid& f, int axis);

/// ||grad f||_{L1}: integral of the Euclidean norm of the centred-difference gradient.
double gradient_l1(const DensityGrid& f);
/// ||grad^2 f||_{L1}: integral of the spectral norm of the second-difference Hessian.
double hessian_l1(const DensityGrid& f);
/// Integral of max(|d1|, |d2|, |d1 + d2|/sqrt2, |d1 - d2|/sqrt2): the
/// sup-over-unit-directions surrogate for a gradient given by its two partials.
double direction_sup_l1(const DensityGrid& d1, const DensityGrid& d2);

/// Spline resampling onto an m x m grid.
DensityGrid resample(const DensityGrid& f, int m);

}  // namespace torswitch
