#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "torswitch/rng.hpp"

namespace torswitch {

/// Distribution of the time between consecutive switches: exponential(lambda),
/// or a custom smooth density chi on (0, inf) with all moments finite.
class SwitchingLaw {
public:
    static SwitchingLaw exponential(double lambda);
    /// Gamma(shape, rate): chi(s) = rate^shape s^(shape-1) e^(-rate s) / Gamma(shape).
    static SwitchingLaw gamma(double shape, double rate);
    /// Arbitrary density. `tail_rate` is an exponential rate the density decays
    /// at (used for tail quadrature and table range). Throws ConfigError when
    /// the density does not integrate to 1 within 1e-8.
    static SwitchingLaw custom(std::function<double(double)> density, double tail_rate, std::string name);

    bool is_exponential() const { return kind_ == Kind::exponential; }
    bool is_gamma() const { return kind_ == Kind::gamma; }
    const std::string& name() const { return name_; }

    /// Exponential rate; for non-exponential laws the rate of the tail.
    double lambda() const { return rate_; }
    double shape() const { return shape_; }
    double tail_rate() const { return rate_; }
    double mean() const;
    double density(double s) const;

    /// Draws one gap. Exponential laws invert the CDF in closed form, the others
    /// use a 2^16-node inverse-CDF table refined by Newton steps.
    double sample(CounterRng& rng) const;

    /// Integral of the density over (0, inf) as measured at construction.
    double measured_mass() const { return mass_; }

private:
    enum class Kind { exponential, gamma, custom };

    struct Table {
        double s_max = 0.0;
        std::vector<double> s;    // abscissae, uniform in [0, s_max]
        std::vector<double> cdf;  // CDF at s
        double cdf_between(const std::function<double(double)>& chi, double a, double b) const;
    };

    SwitchingLaw() = default;
    void build_table();

    Kind kind_ = Kind::exponential;
    std::string name_;
    double rate_ = 1.0;
    double shape_ = 1.0;
    double mass_ = 1.0;
    std::function<double(double)> density_;
    std::shared_ptr<const Table> table_;
};

}  // namespace torswitch
