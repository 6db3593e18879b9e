#pragma once

// Special flow over the rotation r -> r + omega under a roof H: points move
// up at unit speed and jump (r, H(r)) -> (r + omega, 0).

#include <cstdint>
#include <string>
#include <vector>

#include "torswitch/linalg.hpp"

namespace torswitch {

struct RoofTerm {
    int k = 1;
    double amplitude = 0.0;
    double phase = 0.0;
};

/// H(r) = h0 + sum a_k sin(2 pi k r + phi_k).
class SpecialFlowSpec {
public:
    /// Throws ConfigError when omega is outside [0, 1), when H is not positive
    /// on a 2^14-point grid, or when H' disagrees with centred differences of H
    /// by more than 1e-8.
    SpecialFlowSpec(double omega, std::string omega_tag, double h0, std::vector<RoofTerm> terms);

    /// omega = (sqrt5 - 1)/2, H(r) = 1 + amplitude sin(2 pi r).
    static SpecialFlowSpec sinusoidal(double amplitude);

    double omega() const { return omega_; }
    const std::string& omega_tag() const { return omega_tag_; }
    double h0() const { return h0_; }
    const std::vector<RoofTerm>& terms() const { return terms_; }

    double roof(double r) const;
    double roof_derivative(double r) const;
    double h_min() const { return h_min_; }
    double h_max() const { return h_max_; }

    /// Same omega and h0, every amplitude multiplied by `factor`.
    SpecialFlowSpec scaled(double factor) const;

private:
    double omega_;
    std::string omega_tag_;
    double h0_;
    std::vector<RoofTerm> terms_;
    double h_min_ = 0.0;
    double h_max_ = 0.0;
};

struct SpecialPoint {
    double r = 0.0;
    double h = 0.0;
};

struct SpecialStep {
    SpecialPoint point;
    /// r at each roof hit, in order.
    std::vector<double> crossings;
};

/// Flows p for time t >= 0 (std::domain_error otherwise, or when p is not
/// inside M). Heights reaching the roof exactly jump.
SpecialStep special_step(const SpecialFlowSpec& spec, const SpecialPoint& p, double t);

/// D Phi~^t(p) = [[1, 0], [-sum_k H'(r_k), 1]] in (r, h) coordinates.
Mat2 shear_jacobian(const SpecialFlowSpec& spec, const SpecialPoint& p, double t);
/// The same matrix from an existing crossing list.
Mat2 shear_from_crossings(const SpecialFlowSpec& spec, const std::vector<double>& crossings);

struct GrowthRow {
    double t = 0.0;
    double max_shear = 0.0;
    long max_crossings = 0;
};

struct GrowthReport {
    std::vector<GrowthRow> rows;
    /// Log-log slope of max_shear against 1 + t.
    double fitted_exponent = 0.0;
};

/// Max over n_samples random start points of |sum_k H'(r_k)| at t = 1..t_max.
GrowthReport growth_report(const SpecialFlowSpec& spec, int t_max, int n_samples, std::uint64_t seed = 0);

/// "t,max_shear,fitted_exponent" with one row per t.
std::string growth_report_csv(const GrowthReport& report);

}  // namespace torswitch
