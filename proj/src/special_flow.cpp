#include "torswitch/special_flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "torswitch/errors.hpp"
#include "torswitch/flows.hpp"
#include "torswitch/rng.hpp"
#include "torswitch/torus.hpp"
#include "torswitch/vector_fields.hpp"

namespace torswitch {

SpecialFlowSpec::SpecialFlowSpec(double omega, std::string omega_tag, double h0, std::vector<RoofTerm> terms)
    : omega_(omega), omega_tag_(std::move(omega_tag)), h0_(h0), terms_(std::move(terms)) {
    if (!(omega >= 0.0 && omega < 1.0)) throw ConfigError("omega must lie in [0, 1)");
    for (const RoofTerm& t : terms_)
        if (t.k < 1 || !std::isfinite(t.amplitude) || !std::isfinite(t.phase))
            throw ConfigError("roof terms need k >= 1 and finite amplitude and phase");
    constexpr int kGrid = 1 << 14;
    h_min_ = INFINITY;
    h_max_ = -INFINITY;
    for (int i = 0; i < kGrid; ++i) {
        const double r = static_cast<double>(i) / kGrid;
        const double v = roof(r);
        h_min_ = std::min(h_min_, v);
        h_max_ = std::max(h_max_, v);
        const double d = 1e-6;
        const double fd = (roof(r + d) - roof(r - d)) / (2.0 * d);
        if (std::fabs(fd - roof_derivative(r)) > 1e-8)
            throw ConfigError("roof derivative disagrees with finite differences at r = " + std::to_string(r));
    }
    if (!(h_min_ > 0.0)) throw ConfigError("roof must be positive; min on the grid is " + std::to_string(h_min_));
}

SpecialFlowSpec SpecialFlowSpec::sinusoidal(double amplitude) {
    return SpecialFlowSpec((std::sqrt(5.0) - 1.0) / 2.0, "golden", 1.0, {{1, amplitude, 0.0}});
}

double SpecialFlowSpec::roof(double r) const {
    double v = h0_;
    for (const RoofTerm& t : terms_) v += t.amplitude * std::sin(kTwoPi * t.k * r + t.phase);
    return v;
}

double SpecialFlowSpec::roof_derivative(double r) const {
    double v = 0.0;
    for (const RoofTerm& t : terms_) v += kTwoPi * t.k * t.amplitude * std::cos(kTwoPi * t.k * r + t.phase);
    return v;
}

SpecialFlowSpec SpecialFlowSpec::scaled(double factor) const {
    std::vector<RoofTerm> t = terms_;
    for (RoofTerm& x : t) x.amplitude *= factor;
    return SpecialFlowSpec(omega_, omega_tag_, h0_, std::move(t));
}

SpecialStep special_step(const SpecialFlowSpec& spec, const SpecialPoint& p, double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::domain_error("special_step needs finite t >= 0");
    if (!(p.r >= 0.0 && p.r < 1.0) || !(p.h >= 0.0 && p.h < spec.roof(p.r)))
        throw std::domain_error("special_step: point outside M");
    SpecialStep out;
    double r = p.r, h = p.h, rem = t;
    for (;;) {
        const double to_roof = spec.roof(r) - h;
        if (rem < to_roof) {
            h += rem;
            break;
        }
        rem -= to_roof;
        out.crossings.push_back(r);
        r = wrap_unit(r + spec.omega());
        h = 0.0;
    }
    out.point = {r, h};
    return out;
}

Mat2 shear_from_crossings(const SpecialFlowSpec& spec, const std::vector<double>& crossings) {
    double a = 0.0;
    for (double r : crossings) a -= spec.roof_derivative(r);
    return {1.0, 0.0, a, 1.0};
}

Mat2 shear_jacobian(const SpecialFlowSpec& spec, const SpecialPoint& p, double t) {
    return shear_from_crossings(spec, special_step(spec, p, t).crossings);
}

GrowthReport growth_report(const SpecialFlowSpec& spec, int t_max, int n_samples, std::uint64_t seed) {
    if (t_max < 1 || n_samples < 1) throw std::invalid_argument("growth_report needs t_max >= 1, n_samples >= 1");
    GrowthReport rep;
    rep.rows.resize(t_max);
    for (int i = 0; i < t_max; ++i) rep.rows[i].t = i + 1;
    CounterRng rng = CounterRng::stream(seed, 0);
    for (int s = 0; s < n_samples; ++s) {
        SpecialPoint p;
        p.r = rng.uniform();
        p.h = rng.uniform() * spec.roof(p.r);
        double sum = 0.0;
        long count = 0;
        for (int i = 0; i < t_max; ++i) {
            const SpecialStep st = special_step(spec, p, 1.0);
            for (double r : st.crossings) sum += spec.roof_derivative(r);
            count += static_cast<long>(st.crossings.size());
            p = st.point;
            rep.rows[i].max_shear = std::max(rep.rows[i].max_shear, std::fabs(sum));
            rep.rows[i].max_crossings = std::max(rep.rows[i].max_crossings, count);
        }
    }
    std::vector<double> ts, vs;
    for (const GrowthRow& r : rep.rows) {
        ts.push_back(r.t);
        vs.push_back(r.max_shear);
    }
    rep.fitted_exponent = fit_growth_exponent(ts, vs);
    return rep;
}

std::string growth_report_csv(const GrowthReport& report) {
    std::string out = "t,max_shear,fitted_exponent\n";
    char buf[128];
    for (const GrowthRow& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r.t, r.max_shear, report.fitted_exponent);
        out += buf;
    }
    return out;
}

}  // namespace torswitch
