#include "torswitch/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "torswitch/errors.hpp"

namespace torswitch {

namespace {

void check_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    check_object(j, where);
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError("unknown key '" + where + "." + it.key() + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("key '" + where + "." + key + "' has the wrong type");
    }
}

template <class T>
T require(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError("missing key '" + where + "." + key + "'");
    T v{};
    read(j, key, v, where);
    return v;
}

Vec2 vec_from(const json& j, const char* key, const std::string& where) {
    const auto v = require<std::vector<double>>(j, key, where);
    if (v.size() != 2) throw ConfigError("key '" + where + "." + key + "' must have two entries");
    return {v[0], v[1]};
}

json vec_to(const Vec2& v) { return json::array({v.x1, v.x2}); }

void positive(double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("'") + key + "' must be positive");
}
void at_least(long v, long lo, const char* key) {
    if (v < lo) throw ConfigError(std::string("'") + key + "' must be >= " + std::to_string(lo));
}

}  // namespace

VectorFieldSpec field_from_json(const json& j, const std::string& where) {
    check_object(j, where);
    const auto kind = require<std::string>(j, "kind", where);
    if (kind == "constant") {
        check_keys(j, {"kind", "v"}, where);
        return VectorFieldSpec::constant(vec_from(j, "v", where));
    }
    if (kind == "conjugated") {
        check_keys(j, {"kind", "base", "sigma"}, where);
        const std::string sw = where + ".sigma";
        if (!j.contains("sigma")) throw ConfigError("missing key '" + sw + "'");
        const json& s = j.at("sigma");
        check_keys(s, {"epsilon", "amplitudes", "phases"}, sw);
        const double eps = require<double>(s, "epsilon", sw);
        const Vec2 amp = s.contains("amplitudes") ? vec_from(s, "amplitudes", sw) : Vec2{1.0, 1.0};
        const Vec2 ph = s.contains("phases") ? vec_from(s, "phases", sw) : Vec2{0.0, 0.0};
        if (eps < 0.0) throw ConfigError("'" + sw + ".epsilon' must be >= 0");
        const DiffeoSpec sigma(eps, amp, ph);
        if (!sigma.is_valid()) throw ConfigError("'" + sw + "' is not a diffeomorphism (epsilon >= bound)");
        return make_conjugated_field(vec_from(j, "base", where), sigma);
    }
    if (kind == "trig") {
        check_keys(j, {"kind", "mean", "terms"}, where);
        std::vector<TrigTerm> terms;
        if (j.contains("terms")) {
            if (!j.at("terms").is_array()) throw ConfigError("'" + where + ".terms' must be an array");
            for (const json& t : j.at("terms")) {
                const std::string tw = where + ".terms[]";
                check_keys(t, {"k", "cos", "sin"}, tw);
                const auto k = require<std::vector<int>>(t, "k", tw);
                if (k.size() != 2) throw ConfigError("'" + tw + ".k' must have two entries");
                TrigTerm term;
                term.k1 = k[0];
                term.k2 = k[1];
                if (t.contains("cos")) term.cos_coef = vec_from(t, "cos", tw);
                if (t.contains("sin")) term.sin_coef = vec_from(t, "sin", tw);
                terms.push_back(term);
            }
        }
        return VectorFieldSpec::trig(vec_from(j, "mean", where), std::move(terms));
    }
    throw ConfigError("'" + where + ".kind' must be constant, conjugated or trig, got '" + kind + "'");
}

json field_to_json(const VectorFieldSpec& f) {
    switch (f.kind()) {
        case VectorFieldSpec::Kind::constant:
            return {{"kind", "constant"}, {"v", vec_to(f.base())}};
        case VectorFieldSpec::Kind::conjugated: {
            const DiffeoSpec& s = f.sigma();
            return {{"kind", "conjugated"},
                    {"base", vec_to(f.base())},
                    {"sigma",
                     {{"epsilon", s.epsilon()}, {"amplitudes", vec_to(s.amplitudes())}, {"phases", vec_to(s.phases())}}}};
        }
        case VectorFieldSpec::Kind::trig: {
            json terms = json::array();
            for (const TrigTerm& t : f.trig_terms())
                terms.push_back({{"k", {t.k1, t.k2}}, {"cos", vec_to(t.cos_coef)}, {"sin", vec_to(t.sin_coef)}});
            return {{"kind", "trig"}, {"mean", vec_to(f.trig_mean())}, {"terms", terms}};
        }
    }
    return {};
}

SwitchingLaw ExperimentConfig::switching_law() const {
    if (law == "gamma") return SwitchingLaw::gamma(gamma_shape, gamma_rate);
    return SwitchingLaw::exponential(lambda);
}

QuadratureRule ExperimentConfig::quadrature_rule() const {
    const SwitchingLaw l = switching_law();
    if (quadrature == "composite") return QuadratureRule::composite_for_law(l, composite);
    return QuadratureRule::gauss_for_law(l, m);
}

SpecialFlowSpec ExperimentConfig::special_flow_spec() const {
    double omega = 0.0;
    if (special_flow.omega == "golden")
        omega = kAlpha;
    else if (special_flow.omega == "silver")
        omega = kBeta;
    else {
        std::size_t pos = 0;
        try {
            omega = std::stod(special_flow.omega, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != special_flow.omega.size())
            throw ConfigError("'special_flow.omega' must be golden, silver or a number, got '" +
                              special_flow.omega + "'");
    }
    return SpecialFlowSpec(omega, special_flow.omega, special_flow.h0, special_flow.roof);
}

ExperimentConfig config_from_json(const json& j) {
    check_keys(j,
               {"fields", "lambda", "switching", "grid_n", "quadrature", "seed", "max_step", "output_dir", "simulate",
                "solve", "transversality", "verify", "smoothing", "special_flow"},
               "config");
    ExperimentConfig c;

    if (!j.contains("fields")) throw ConfigError("missing key 'fields'");
    const json& f = j.at("fields");
    check_object(f, "fields");
    if (f.contains("preset")) {
        check_keys(f, {"preset", "epsilon"}, "fields");
        const auto preset = require<std::string>(f, "preset", "fields");
        if (preset == "constant_pair") {
            if (f.contains("epsilon")) throw ConfigError("'fields.epsilon' only applies to conjugated_pair");
            c.fields = constant_pair();
        } else if (preset == "conjugated_pair") {
            double eps = 0.1;
            read(f, "epsilon", eps, "fields");
            if (eps < 0.0) throw ConfigError("'fields.epsilon' must be >= 0");
            try {
                c.fields = conjugated_pair(eps);
            } catch (const DiffeoInversionError& e) {
                throw ConfigError(std::string("'fields.epsilon' does not give a diffeomorphism: ") + e.what());
            }
        } else {
            throw ConfigError("'fields.preset' must be constant_pair or conjugated_pair, got '" + preset + "'");
        }
    } else {
        check_keys(f, {"u0", "u1"}, "fields");
        if (!f.contains("u0")) throw ConfigError("missing key 'fields.u0'");
        if (!f.contains("u1")) throw ConfigError("missing key 'fields.u1'");
        c.fields = {field_from_json(f.at("u0"), "fields.u0"), field_from_json(f.at("u1"), "fields.u1")};
    }
    c.fields_json = {{"u0", field_to_json(c.fields.u0)}, {"u1", field_to_json(c.fields.u1)}};

    read(j, "lambda", c.lambda, "config");
    positive(c.lambda, "lambda");
    if (j.contains("switching")) {
        const json& s = j.at("switching");
        check_keys(s, {"law", "shape", "rate"}, "switching");
        read(s, "law", c.law, "switching");
        if (c.law != "exponential" && c.law != "gamma")
            throw ConfigError("'switching.law' must be exponential or gamma, got '" + c.law + "'");
        if (c.law == "exponential" && (s.contains("shape") || s.contains("rate")))
            throw ConfigError("'switching.shape' and 'switching.rate' only apply to the gamma law (use 'lambda')");
        read(s, "shape", c.gamma_shape, "switching");
        read(s, "rate", c.gamma_rate, "switching");
        positive(c.gamma_shape, "switching.shape");
        positive(c.gamma_rate, "switching.rate");
    }
    read(j, "grid_n", c.grid_n, "config");
    at_least(c.grid_n, 4, "grid_n");
    if (j.contains("quadrature")) {
        const json& q = j.at("quadrature");
        check_keys(q, {"kind", "m", "panel_width", "points_per_panel", "cutoff", "tail_order"}, "quadrature");
        read(q, "kind", c.quadrature, "quadrature");
        if (c.quadrature != "gauss" && c.quadrature != "composite")
            throw ConfigError("'quadrature.kind' must be gauss or composite, got '" + c.quadrature + "'");
        read(q, "m", c.m, "quadrature");
        read(q, "panel_width", c.composite.panel_width, "quadrature");
        read(q, "points_per_panel", c.composite.points_per_panel, "quadrature");
        read(q, "cutoff", c.composite.cutoff, "quadrature");
        read(q, "tail_order", c.composite.tail_order, "quadrature");
    }
    at_least(c.m, 1, "quadrature.m");
    positive(c.composite.panel_width, "quadrature.panel_width");
    at_least(c.composite.points_per_panel, 1, "quadrature.points_per_panel");
    positive(c.composite.cutoff, "quadrature.cutoff");
    at_least(c.composite.tail_order, 1, "quadrature.tail_order");
    read(j, "seed", c.seed, "config");
    read(j, "max_step", c.max_step, "config");
    positive(c.max_step, "max_step");
    read(j, "output_dir", c.output_dir, "config");

    if (j.contains("simulate")) {
        const json& s = j.at("simulate");
        check_keys(s, {"n_switches", "trajectories", "dt"}, "simulate");
        read(s, "n_switches", c.simulate.n_switches, "simulate");
        read(s, "trajectories", c.simulate.trajectories, "simulate");
        read(s, "dt", c.simulate.dt, "simulate");
    }
    at_least(c.simulate.n_switches, 1, "simulate.n_switches");
    at_least(c.simulate.trajectories, 1, "simulate.trajectories");
    positive(c.simulate.dt, "simulate.dt");

    if (j.contains("solve")) {
        const json& s = j.at("solve");
        check_keys(s, {"tol", "max_iter", "initial", "perturbation"}, "solve");
        read(s, "tol", c.solve.tol, "solve");
        read(s, "max_iter", c.solve.max_iter, "solve");
        read(s, "initial", c.solve.initial, "solve");
        read(s, "perturbation", c.solve.perturbation, "solve");
    }
    if (!(c.solve.tol >= 0.0)) throw ConfigError("'solve.tol' must be >= 0");
    at_least(c.solve.max_iter, 1, "solve.max_iter");
    if (c.solve.initial != "uniform" && c.solve.initial != "perturbed")
        throw ConfigError("'solve.initial' must be uniform or perturbed, got '" + c.solve.initial + "'");
    if (!(std::fabs(c.solve.perturbation) < 1.0)) throw ConfigError("'solve.perturbation' must lie in (-1, 1)");

    if (j.contains("transversality")) {
        const json& s = j.at("transversality");
        check_keys(s, {"resolution", "threshold"}, "transversality");
        read(s, "resolution", c.transversality.resolution, "transversality");
        read(s, "threshold", c.transversality.threshold, "transversality");
    }
    at_least(c.transversality.resolution, 16, "transversality.resolution");
    positive(c.transversality.threshold, "transversality.threshold");

    if (j.contains("verify")) {
        const json& s = j.at("verify");
        const std::string w = "verify";
        check_keys(s,
                   {"magic_samples", "magic_st_max", "magic_tol", "gradient_points", "gradient_tol", "fd_step",
                    "ibp_panel_width", "fd_panel_width", "points_per_panel", "cutoff", "k_hat_grid", "jacobian_t_max",
                    "jacobian_resolution", "jacobian_slack", "growth_exponent_max", "special_flow_samples"},
                   w);
        VerifyConfig& v = c.verify;
        read(s, "magic_samples", v.magic_samples, w);
        read(s, "magic_st_max", v.magic_st_max, w);
        read(s, "magic_tol", v.magic_tol, w);
        read(s, "gradient_points", v.gradient_points, w);
        read(s, "gradient_tol", v.gradient_tol, w);
        read(s, "fd_step", v.fd_step, w);
        read(s, "ibp_panel_width", v.ibp_panel_width, w);
        read(s, "fd_panel_width", v.fd_panel_width, w);
        read(s, "points_per_panel", v.points_per_panel, w);
        read(s, "cutoff", v.cutoff, w);
        read(s, "k_hat_grid", v.k_hat_grid, w);
        read(s, "jacobian_t_max", v.jacobian_t_max, w);
        read(s, "jacobian_resolution", v.jacobian_resolution, w);
        read(s, "jacobian_slack", v.jacobian_slack, w);
        read(s, "growth_exponent_max", v.growth_exponent_max, w);
        read(s, "special_flow_samples", v.special_flow_samples, w);
    }
    {
        const VerifyConfig& v = c.verify;
        at_least(v.magic_samples, 1, "verify.magic_samples");
        positive(v.magic_st_max, "verify.magic_st_max");
        positive(v.magic_tol, "verify.magic_tol");
        at_least(v.gradient_points, 1, "verify.gradient_points");
        positive(v.gradient_tol, "verify.gradient_tol");
        positive(v.fd_step, "verify.fd_step");
        positive(v.ibp_panel_width, "verify.ibp_panel_width");
        positive(v.fd_panel_width, "verify.fd_panel_width");
        at_least(v.points_per_panel, 1, "verify.points_per_panel");
        positive(v.cutoff, "verify.cutoff");
        at_least(v.k_hat_grid, 4, "verify.k_hat_grid");
        at_least(v.jacobian_t_max, 1, "verify.jacobian_t_max");
        at_least(v.jacobian_resolution, 1, "verify.jacobian_resolution");
        if (!(v.jacobian_slack >= 0.0)) throw ConfigError("'verify.jacobian_slack' must be >= 0");
        positive(v.growth_exponent_max, "verify.growth_exponent_max");
        at_least(v.special_flow_samples, 1, "verify.special_flow_samples");
    }

    if (j.contains("smoothing")) {
        const json& s = j.at("smoothing");
        check_keys(s, {"applications", "test_function"}, "smoothing");
        read(s, "applications", c.smoothing.applications, "smoothing");
        read(s, "test_function", c.smoothing.test_function, "smoothing");
    }
    if (c.smoothing.applications < 0 || c.smoothing.applications > 5)
        throw ConfigError("'smoothing.applications' must lie in 0..5");
    if (c.smoothing.test_function != "indicator" && c.smoothing.test_function != "smooth")
        throw ConfigError("'smoothing.test_function' must be indicator or smooth");

    if (j.contains("special_flow")) {
        const json& s = j.at("special_flow");
        const std::string w = "special_flow";
        check_keys(s, {"omega", "h0", "roof", "t_max", "samples", "crossing_margin", "growth_exponent_max"}, w);
        SpecialFlowConfig& sf = c.special_flow;
        if (s.contains("omega")) {
            const json& o = s.at("omega");
            if (o.is_number())
                sf.omega = o.dump();
            else
                read(s, "omega", sf.omega, w);
        }
        read(s, "h0", sf.h0, w);
        if (s.contains("roof")) {
            if (!s.at("roof").is_array()) throw ConfigError("'special_flow.roof' must be an array");
            sf.roof.clear();
            for (const json& t : s.at("roof")) {
                const std::string tw = w + ".roof[]";
                check_keys(t, {"k", "amplitude", "phase"}, tw);
                RoofTerm r;
                r.k = require<int>(t, "k", tw);
                r.amplitude = require<double>(t, "amplitude", tw);
                read(t, "phase", r.phase, tw);
                sf.roof.push_back(r);
            }
        }
        read(s, "t_max", sf.t_max, w);
        read(s, "samples", sf.samples, w);
        read(s, "crossing_margin", sf.crossing_margin, w);
        read(s, "growth_exponent_max", sf.growth_exponent_max, w);
    }
    at_least(c.special_flow.t_max, 1, "special_flow.t_max");
    at_least(c.special_flow.samples, 1, "special_flow.samples");
    if (!(c.special_flow.crossing_margin >= 0.0)) throw ConfigError("'special_flow.crossing_margin' must be >= 0");
    c.special_flow_spec();  // validates omega and the roof
    c.switching_law();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["fields"] = c.fields_json;
    j["lambda"] = c.lambda;
    j["switching"] = c.law == "gamma" ? json{{"law", "gamma"}, {"shape", c.gamma_shape}, {"rate", c.gamma_rate}}
                                      : json{{"law", "exponential"}};
    j["grid_n"] = c.grid_n;
    if (c.quadrature == "gauss")
        j["quadrature"] = {{"kind", "gauss"}, {"m", c.m}};
    else
        j["quadrature"] = {{"kind", "composite"},
                           {"panel_width", c.composite.panel_width},
                           {"points_per_panel", c.composite.points_per_panel},
                           {"cutoff", c.composite.cutoff},
                           {"tail_order", c.composite.tail_order}};
    j["seed"] = c.seed;
    j["max_step"] = c.max_step;
    j["output_dir"] = c.output_dir;
    j["simulate"] = {{"n_switches", c.simulate.n_switches},
                     {"trajectories", c.simulate.trajectories},
                     {"dt", c.simulate.dt}};
    j["solve"] = {{"tol", c.solve.tol},
                  {"max_iter", c.solve.max_iter},
                  {"initial", c.solve.initial},
                  {"perturbation", c.solve.perturbation}};
    j["transversality"] = {{"resolution", c.transversality.resolution}, {"threshold", c.transversality.threshold}};
    const VerifyConfig& v = c.verify;
    j["verify"] = {{"magic_samples", v.magic_samples},
                   {"magic_st_max", v.magic_st_max},
                   {"magic_tol", v.magic_tol},
                   {"gradient_points", v.gradient_points},
                   {"gradient_tol", v.gradient_tol},
                   {"fd_step", v.fd_step},
                   {"ibp_panel_width", v.ibp_panel_width},
                   {"fd_panel_width", v.fd_panel_width},
                   {"points_per_panel", v.points_per_panel},
                   {"cutoff", v.cutoff},
                   {"k_hat_grid", v.k_hat_grid},
                   {"jacobian_t_max", v.jacobian_t_max},
                   {"jacobian_resolution", v.jacobian_resolution},
                   {"jacobian_slack", v.jacobian_slack},
                   {"growth_exponent_max", v.growth_exponent_max},
                   {"special_flow_samples", v.special_flow_samples}};
    j["smoothing"] = {{"applications", c.smoothing.applications}, {"test_function", c.smoothing.test_function}};
    json roof = json::array();
    for (const RoofTerm& t : c.special_flow.roof)
        roof.push_back({{"k", t.k}, {"amplitude", t.amplitude}, {"phase", t.phase}});
    j["special_flow"] = {{"omega", c.special_flow.omega},
                         {"h0", c.special_flow.h0},
                         {"roof", roof},
                         {"t_max", c.special_flow.t_max},
                         {"samples", c.special_flow.samples},
                         {"crossing_margin", c.special_flow.crossing_margin},
                         {"growth_exponent_max", c.special_flow.growth_exponent_max}};
    return j;
}

std::string grid_to_csv(const DensityGrid& g, double lambda, int mode) {
    const int n = g.n();
    std::string out;
    char buf[64];
    out += "# N=" + std::to_string(n);
    std::snprintf(buf, sizeof buf, " lambda=%.17g", lambda);
    out += buf;
    out += " mode=" + std::to_string(mode);
    std::snprintf(buf, sizeof buf, " mass=%.17g\n", g.mass());
    out += buf;
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            std::snprintf(buf, sizeof buf, k + 1 < n ? "%.17g," : "%.17g\n", g(j, k));
            out += buf;
        }
    }
    return out;
}

DensityGrid grid_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# N=", 0) != 0) throw ConfigError("grid CSV: missing '# N=' header");
    const int n = std::atoi(line.c_str() + 4);
    if (n < 1) throw ConfigError("grid CSV: bad N in header");
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(n) * n);
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    }
    if (v.size() != static_cast<std::size_t>(n) * n) throw ConfigError("grid CSV: expected N*N values");
    return DensityGrid(n, std::move(v));
}

std::string grid_to_pgm(const DensityGrid& g) {
    const int n = g.n();
    const double top = g.max();
    std::string out = "P2\n" + std::to_string(n) + " " + std::to_string(n) + "\n255\n";
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            int p = 0;
            if (top > 0.0) p = static_cast<int>(std::lround(255.0 * std::clamp(g(j, k) / top, 0.0, 1.0)));
            out += std::to_string(p);
            out += k + 1 < n ? ' ' : '\n';
        }
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace torswitch
