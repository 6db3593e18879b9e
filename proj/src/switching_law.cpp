#include "torswitch/switching_law.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "torswitch/errors.hpp"
#include "torswitch/quadrature.hpp"

namespace torswitch {

namespace {

constexpr int kTableNodes = 1 << 16;

const Rule1D& gl8() {
    static const Rule1D r = gauss_legendre(8);
    return r;
}

}  // namespace

double SwitchingLaw::Table::cdf_between(const std::function<double(double)>& chi, double a, double b) const {
    const Rule1D& g = gl8();
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) sum += g.weights[i] * chi(a + 0.5 * (b - a) * (g.nodes[i] + 1.0));
    return 0.5 * (b - a) * sum;
}

SwitchingLaw SwitchingLaw::exponential(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("switching rate lambda must be positive");
    SwitchingLaw law;
    law.kind_ = Kind::exponential;
    law.rate_ = lambda;
    law.name_ = "exponential";
    law.density_ = [lambda](double s) { return s < 0.0 ? 0.0 : lambda * std::exp(-lambda * s); };
    return law;
}

SwitchingLaw SwitchingLaw::gamma(double shape, double rate) {
    if (!(shape >= 1.0) || !std::isfinite(shape)) throw ConfigError("gamma shape must be >= 1");
    if (!(rate > 0.0) || !std::isfinite(rate)) throw ConfigError("gamma rate must be positive");
    SwitchingLaw law;
    law.kind_ = Kind::gamma;
    law.rate_ = rate;
    law.shape_ = shape;
    law.name_ = "gamma(" + std::to_string(shape) + "," + std::to_string(rate) + ")";
    const double log_norm = shape * std::log(rate) - std::lgamma(shape);
    law.density_ = [shape, rate, log_norm](double s) {
        if (s < 0.0) return 0.0;
        if (s == 0.0) return shape == 1.0 ? std::exp(log_norm) : 0.0;
        return std::exp(log_norm + (shape - 1.0) * std::log(s) - rate * s);
    };
    law.build_table();
    return law;
}

SwitchingLaw SwitchingLaw::custom(std::function<double(double)> density, double tail_rate, std::string name) {
    if (!density) throw ConfigError("custom switching law needs a density");
    if (!(tail_rate > 0.0)) throw ConfigError("custom switching law needs a positive tail rate");
    SwitchingLaw law;
    law.kind_ = Kind::custom;
    law.rate_ = tail_rate;
    law.name_ = std::move(name);
    law.density_ = std::move(density);
    law.build_table();
    return law;
}

void SwitchingLaw::build_table() {
    auto table = std::make_shared<Table>();
    // extend the range until the density has decayed far below double resolution
    double s_max = 8.0 / rate_;
    while (density_(s_max) / rate_ > 1e-18 && s_max < 1e4 / rate_) s_max *= 1.5;
    table->s_max = s_max;
    table->s.resize(kTableNodes);
    table->cdf.resize(kTableNodes);
    const double ds = s_max / (kTableNodes - 1);
    double acc = 0.0;
    for (int k = 0; k < kTableNodes; ++k) {
        const double s = k * ds;
        if (k > 0) acc += table->cdf_between(density_, s - ds, s);
        table->s[k] = s;
        table->cdf[k] = acc;
    }
    // tail beyond s_max by a shifted Laguerre rule
    const Rule1D lag = gauss_laguerre_standard(8, 0.0);
    double tail = 0.0;
    for (std::size_t i = 0; i < lag.size(); ++i)
        tail += lag.weights[i] * std::exp(lag.nodes[i]) / rate_ * density_(s_max + lag.nodes[i] / rate_);
    mass_ = acc + tail;
    if (!(std::abs(mass_ - 1.0) < 1e-8))
        throw ConfigError("switching density " + name_ + " integrates to " + std::to_string(mass_) +
                          ", expected 1 within 1e-8");
    table_ = std::move(table);
}

double SwitchingLaw::mean() const {
    if (kind_ == Kind::exponential) return 1.0 / rate_;
    if (kind_ == Kind::gamma) return shape_ / rate_;
    const Table& t = *table_;
    double m = 0.0;
    for (std::size_t k = 1; k < t.s.size(); ++k)
        m += t.cdf_between([this](double s) { return s * density_(s); }, t.s[k - 1], t.s[k]);
    return m;
}

double SwitchingLaw::density(double s) const { return density_(s); }

double SwitchingLaw::sample(CounterRng& rng) const {
    const double u = rng.uniform();
    if (kind_ == Kind::exponential) return -std::log(u) / rate_;
    const Table& t = *table_;
    if (u >= t.cdf.back()) return t.s_max;
    const auto it = std::upper_bound(t.cdf.begin(), t.cdf.end(), u);
    const std::size_t k = static_cast<std::size_t>(it - t.cdf.begin()) - 1;
    const double a = t.s[k], b = t.s[k + 1];
    const double fa = t.cdf[k], fb = t.cdf[k + 1];
    double s = fb > fa ? a + (u - fa) / (fb - fa) * (b - a) : a;
    for (int it2 = 0; it2 < 4; ++it2) {
        const double chi = density_(s);
        if (!(chi > 0.0)) break;
        const double step = (fa + t.cdf_between(density_, a, s) - u) / chi;
        s = std::clamp(s - step, a, b);
        if (std::abs(step) < 1e-14 * std::max(1.0, s)) break;
    }
    return s;
}

}  // namespace torswitch
