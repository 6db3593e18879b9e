#pragma once

// Experiment configuration (one JSON document per run) and artifact writers.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "torswitch/density_grid.hpp"
#include "torswitch/quadrature.hpp"
#include "torswitch/special_flow.hpp"
#include "torswitch/switching_law.hpp"
#include "torswitch/vector_fields.hpp"

namespace torswitch {

using nlohmann::json;

/// Field from {"kind": "constant", "v": [a, b]},
/// {"kind": "conjugated", "base": [a, b], "sigma": {"epsilon", "amplitudes", "phases"}}
/// or {"kind": "trig", "mean": [a, b], "terms": [{"k": [k1, k2], "cos": [..], "sin": [..]}]}.
VectorFieldSpec field_from_json(const json& j, const std::string& where);
json field_to_json(const VectorFieldSpec& f);

struct SimulateConfig {
    long n_switches = 100000;
    int trajectories = 1;
    double dt = 1e-2;
};

struct SolveConfig {
    double tol = 1e-6;
    int max_iter = 200;
    std::string initial = "uniform";  // or "perturbed"
    double perturbation = 0.2;
};

struct TransversalityConfig {
    int resolution = 64;
    double threshold = 1e-6;
};

struct VerifyConfig {
    int magic_samples = 100;
    double magic_st_max = 3.0;
    double magic_tol = 1e-5;
    int gradient_points = 6;
    double gradient_tol = 1e-2;
    double fd_step = 1e-4;
    double ibp_panel_width = 0.25;
    double fd_panel_width = 0.125;
    int points_per_panel = 8;
    double cutoff = 14.0;
    int k_hat_grid = 16;
    int jacobian_t_max = 20;
    int jacobian_resolution = 16;
    double jacobian_slack = 0.05;
    double growth_exponent_max = 1.2;
    int special_flow_samples = 1000;
};

struct SmoothingConfig {
    int applications = 2;
    std::string test_function = "indicator";  // or "smooth"
};

struct SpecialFlowConfig {
    std::string omega = "golden";  // "golden", "silver" or a decimal in [0, 1)
    double h0 = 1.0;
    std::vector<RoofTerm> roof{{1, 0.3, 0.0}};
    int t_max = 200;
    int samples = 64;
    double crossing_margin = 0.05;
    double growth_exponent_max = 1.1;
};

struct ExperimentConfig {
    json fields_json;  // resolved u0 / u1 documents
    FieldPair fields = constant_pair();
    double lambda = 1.0;
    std::string law = "exponential";
    double gamma_shape = 2.0;
    double gamma_rate = 2.0;
    int grid_n = 64;
    std::string quadrature = "gauss";  // or "composite"
    int m = 32;
    CompositeOptions composite;
    std::uint64_t seed = 42;
    double max_step = 1e-2;
    std::string output_dir = "out";

    SimulateConfig simulate;
    SolveConfig solve;
    TransversalityConfig transversality;
    VerifyConfig verify;
    SmoothingConfig smoothing;
    SpecialFlowConfig special_flow;

    SwitchingLaw switching_law() const;
    QuadratureRule quadrature_rule() const;
    SpecialFlowSpec special_flow_spec() const;
};

/// Unknown keys, wrong types and missing "fields" throw ConfigError naming the key.
ExperimentConfig config_from_json(const json& j);
ExperimentConfig load_config(const std::string& path);
/// Every resolved value, defaults included.
json config_to_json(const ExperimentConfig& c);

/// "# N=<n> lambda=<l> mode=<m> mass=<s>" then n rows of n values, row j
/// holding cells (j, 0..n-1).
std::string grid_to_csv(const DensityGrid& g, double lambda, int mode);
DensityGrid grid_from_csv(const std::string& text);
/// Plain P2, values scaled so the grid maximum maps to 255.
std::string grid_to_pgm(const DensityGrid& g);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace torswitch
