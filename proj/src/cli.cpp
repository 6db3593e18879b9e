#include "torswitch/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>

#include "CLI11.hpp"
#include "torswitch/errors.hpp"
#include "torswitch/flows.hpp"
#include "torswitch/ibp.hpp"
#include "torswitch/pdmp.hpp"
#include "torswitch/rng.hpp"
#include "torswitch/special_flow.hpp"
#include "torswitch/transfer_operator.hpp"

namespace torswitch {

namespace {

std::string path_in(const RunOptions& o, const std::string& name) {
    return (std::filesystem::path(o.out_dir) / name).string();
}

void prepare(const RunOptions& o) { std::filesystem::create_directories(o.out_dir); }

void write_json(const RunOptions& o, const std::string& name, const json& j) {
    write_text(path_in(o, name), j.dump(2) + "\n");
}

void write_grid(const RunOptions& o, const std::string& stem, const DensityGrid& g, double lambda, int mode) {
    write_text(path_in(o, stem + ".csv"), grid_to_csv(g, lambda, mode));
    write_text(path_in(o, stem + ".pgm"), grid_to_pgm(g));
}

FlowOptions flow_options(const ExperimentConfig& c) {
    FlowOptions f;
    f.max_step = c.max_step;
    return f;
}

TransferOptions transfer_options(const ExperimentConfig& c, const RunOptions& o) {
    TransferOptions t;
    t.flow = flow_options(c);
    t.threads = o.threads;
    return t;
}

double smooth_h(const Vec2& x) { return 1.0 + 0.5 * std::sin(kTwoPi * x.x1) * std::cos(kTwoPi * x.x2); }
double indicator_h(const Vec2& x) { return wrap_unit(x.x1) < 0.5 ? 1.0 : 0.0; }

json check_entry(const std::string& name, double value, const std::string& relation, double threshold, bool pass) {
    return {{"name", name}, {"value", value}, {"relation", relation}, {"threshold", threshold},
            {"status", pass ? "PASS" : "FAIL"}};
}

json skipped(const std::string& name, const std::string& why) {
    return {{"name", name}, {"status", "SKIPPED"}, {"reason", why}};
}

Vec2 unit_vector(CounterRng& rng) {
    const double th = kTwoPi * rng.uniform();
    return {std::cos(th), std::sin(th)};
}

// max det D sigma / min det D sigma on a 256^2 grid; 1 for non-conjugated fields
double sigma_bracket(const VectorFieldSpec& f) {
    if (f.kind() != VectorFieldSpec::Kind::conjugated) return 1.0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    const int n = 256;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            const double d = f.sigma().jacobian_det({(j + 0.5) / n, (k + 0.5) / n});
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
    return hi / lo;
}

}  // namespace

int cmd_simulate(const ExperimentConfig& cfg, const RunOptions& opts) {
    prepare(opts);
    const auto start = std::chrono::steady_clock::now();
    SwitchingConfig sc;
    sc.fields = cfg.fields;
    sc.law = cfg.switching_law();
    sc.seed = cfg.seed;
    sc.flow = flow_options(cfg);
    const int count = cfg.simulate.trajectories;
    const long each = std::max(1L, cfg.simulate.n_switches / count);
    const std::vector<Trajectory> tr = sample_trajectories(sc, count, each, opts.threads);
    const DensityGrid rho0 = occupation_density(tr, cfg.fields, cfg.grid_n, 0, cfg.simulate.dt, sc.flow);
    const DensityGrid rho1 = occupation_density(tr, cfg.fields, cfg.grid_n, 1, cfg.simulate.dt, sc.flow);
    write_grid(opts, "rho0", rho0, cfg.lambda, 0);
    write_grid(opts, "rho1", rho1, cfg.lambda, 1);
    double total_time = 0.0;
    for (const Trajectory& t : tr) total_time += t.total_time;
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json(opts, "simulate.json",
               {{"n_switches", each * count},
                {"trajectories", count},
                {"total_time", total_time},
                {"wall_time", wall},
                {"mass", {rho0.mass(), rho1.mass()}},
                {"config", config_to_json(cfg)}});
    std::printf("simulate: %ld switches, masses %.6f %.6f\n", each * count, rho0.mass(), rho1.mass());
    return kExitOk;
}

int cmd_solve(const ExperimentConfig& cfg, const RunOptions& opts) {
    prepare(opts);
    const QuadratureRule quad = cfg.quadrature_rule();
    const TransferOptions topt = transfer_options(cfg, opts);
    const TransferOperator Q(cfg.fields.u0, cfg.fields.u1, quad, cfg.grid_n, topt);
    DensityGrid h0 = DensityGrid::uniform(cfg.grid_n);
    if (cfg.solve.initial == "perturbed") {
        const double p = cfg.solve.perturbation;
        h0 = DensityGrid::from_function(cfg.grid_n, [p](const Vec2& x) {
            return 1.0 + p * std::sin(kTwoPi * x.x1) * std::cos(kTwoPi * x.x2);
        });
    }
    const FixedPointResult fp = fixed_point(Q, h0, cfg.solve.tol, cfg.solve.max_iter);
    DensityGrid rho1 = apply_single_switch(fp.rho, 1, cfg.fields, quad.s(), topt);
    rho1.normalize();
    // rho1 should be fixed under the swapped composition S_1 o S_0
    DensityGrid back = apply_single_switch(apply_single_switch(rho1, 0, cfg.fields, quad.t(), topt), 1, cfg.fields,
                                           quad.s(), topt);
    const double rho1_residual = l1_distance(back, rho1);
    write_grid(opts, "rho0", fp.rho, cfg.lambda, 0);
    write_grid(opts, "rho1", rho1, cfg.lambda, 1);
    write_json(opts, "solve.json",
               {{"iterations", fp.iterations},
                {"residual", fp.residual},
                {"residual_history", fp.residual_history},
                {"converged", fp.converged},
                {"rho1_swapped_residual", rho1_residual},
                {"max_deviation_from_uniform", max_deviation(fp.rho, 1.0)},
                {"quadrature", quad.description()},
                {"config", config_to_json(cfg)}});
    std::printf("solve: %s after %d iterations, residual %.3e\n", fp.converged ? "converged" : "NOT converged",
                fp.iterations, fp.residual);
    return fp.converged ? kExitOk : kExitNotConverged;
}

int cmd_verify(const ExperimentConfig& cfg, const RunOptions& opts) {
    prepare(opts);
    const VerifyConfig& v = cfg.verify;
    const FieldPair& f = cfg.fields;
    const FlowOptions flow = flow_options(cfg);
    json checks = json::array();
    json report;

    const TransversalityReport tr =
        check_transversality(f.u0, f.u1, cfg.transversality.resolution, cfg.transversality.threshold);
    checks.push_back(check_entry("transversality_min_abs_det", tr.min_abs_det, ">", tr.threshold, tr.pass));
    const bool exponential = cfg.law == "exponential";

    if (!tr.pass) {
        for (const char* name : {"magic_identity", "ibp_gradient_match", "k_hat", "jacobian_bounds", "special_flow"})
            checks.push_back(skipped(name, "fields are not transversal"));
    } else {
        CounterRng rng = CounterRng::stream(cfg.seed, 1);
        double magic = 0.0;
        for (int i = 0; i < v.magic_samples; ++i) {
            const TorusPoint x(rng.uniform(), rng.uniform());
            const double s = v.magic_st_max * rng.uniform(), t = v.magic_st_max * rng.uniform();
            magic = std::max(magic, check_transfer_identity(f.u0, f.u1, x, s, t, unit_vector(rng), flow));
        }
        checks.push_back(check_entry("magic_identity_residual_max", magic, "<", v.magic_tol, magic < v.magic_tol));
        report["magic_residual_max"] = magic;

        if (exponential) {
            CompositeOptions o;
            o.panel_width = v.ibp_panel_width;
            o.points_per_panel = v.points_per_panel;
            o.cutoff = v.cutoff;
            o.tail_order = 4;
            const QuadratureRule q_ibp = QuadratureRule::composite(cfg.lambda, o);
            o.panel_width = v.fd_panel_width;
            const QuadratureRule q_fd = QuadratureRule::composite(cfg.lambda, o);
            TransferOptions lazy = transfer_options(cfg, opts);
            lazy.max_cached_entries = 0;
            const TransferOperator Q(f.u0, f.u1, q_fd, cfg.grid_n, lazy);
            const std::function<double(const Vec2&)> h = smooth_h;
            IbpOptions iopt;
            iopt.flow = flow;
            double worst = 0.0;
            for (int i = 0; i < v.gradient_points; ++i) {
                const Vec2 x{rng.uniform(), rng.uniform()};
                const Vec2 xi = unit_vector(rng);
                const double ibp = ibp_gradient(h, f.u0, f.u1, q_ibp, x, xi, iopt);
                const double d = v.fd_step;
                const double fd = (Q.apply_at(h, x + d * xi) - Q.apply_at(h, x - d * xi)) / (2.0 * d);
                worst = std::max(worst, std::abs(ibp - fd) / std::max(1.0, std::abs(fd)));
            }
            checks.push_back(check_entry("ibp_gradient_match_rel_err", worst, "<", v.gradient_tol, worst < v.gradient_tol));
            report["gradient_match_rel_err"] = worst;

            const DensityGrid ind = DensityGrid::from_function(v.k_hat_grid, indicator_h);
            IbpOptions par = iopt;
            par.threads = opts.threads;
            const L1GradientBound kb = l1_gradient_bound(ind, f.u0, f.u1, cfg.quadrature_rule(), par);
            checks.push_back(check_entry("k_hat_finite", kb.k_hat, "<", std::numeric_limits<double>::max(),
                                         std::isfinite(kb.k_hat)));
            report["K_hat"] = kb.k_hat;
        } else {
            checks.push_back(skipped("ibp_gradient_match", "the IBP formula needs exponential switching"));
            checks.push_back(skipped("k_hat", "the IBP formula needs exponential switching"));
            report["gradient_match_rel_err"] = nullptr;
            report["K_hat"] = nullptr;
        }

        for (int i = 0; i < 2; ++i) {
            const VectorFieldSpec& u = i == 0 ? f.u0 : f.u1;
            const JacobianScan scan = jacobian_bounds_scan(u, v.jacobian_t_max, v.jacobian_resolution, flow, opts.threads);
            const std::string tag = "u" + std::to_string(i);
            if (u.kind() == VectorFieldSpec::Kind::trig) {
                checks.push_back(check_entry("jacobian_min_det_" + tag, scan.min_det, ">", 0.0, scan.min_det > 0.0));
            } else {
                const double c = sigma_bracket(u);
                checks.push_back(check_entry("jacobian_max_det_" + tag, scan.max_det, "<=", c * (1.0 + v.jacobian_slack),
                                             scan.max_det <= c * (1.0 + v.jacobian_slack)));
                checks.push_back(check_entry("jacobian_min_det_" + tag, scan.min_det, ">=",
                                             (1.0 / c) * (1.0 - v.jacobian_slack),
                                             scan.min_det >= (1.0 / c) * (1.0 - v.jacobian_slack)));
            }
            checks.push_back(check_entry("jacobian_growth_exponent_" + tag, scan.growth_exponent, "<=",
                                         v.growth_exponent_max, scan.growth_exponent <= v.growth_exponent_max));
        }

        const SpecialFlowSpec sf = cfg.special_flow_spec();
        bool det_ok = true;
        double worst_ratio = 0.0;
        CounterRng srng = CounterRng::stream(cfg.seed, 2);
        for (int i = 0; i < v.special_flow_samples; ++i) {
            SpecialPoint p;
            p.r = srng.uniform();
            p.h = srng.uniform() * sf.roof(p.r);
            const double t = cfg.special_flow.t_max * srng.uniform();
            const SpecialStep st = special_step(sf, p, t);
            det_ok = det_ok && shear_from_crossings(sf, st.crossings).det() == 1.0;
            const double bound = (1.0 / sf.h_min()) * (1.0 + t) * (1.0 + cfg.special_flow.crossing_margin);
            worst_ratio = std::max(worst_ratio, static_cast<double>(st.crossings.size()) / bound);
        }
        checks.push_back(check_entry("special_flow_det_equals_one", det_ok ? 1.0 : 0.0, "==", 1.0, det_ok));
        checks.push_back(check_entry("special_flow_crossing_ratio_max", worst_ratio, "<=", 1.0, worst_ratio <= 1.0));
    }

    bool all = true;
    for (const json& c : checks) all = all && c.at("status") != "FAIL";
    report["checks"] = checks;
    report["samples"] = {{"magic", v.magic_samples}, {"gradient", v.gradient_points},
                         {"special_flow", v.special_flow_samples}};
    report["all_pass"] = all;
    report["config"] = config_to_json(cfg);
    write_json(opts, "verify.json", report);
    for (const json& c : checks) std::printf("%-40s %s\n", c.at("name").get<std::string>().c_str(),
                                             c.at("status").get<std::string>().c_str());
    return all ? kExitOk : kExitVerification;
}

int cmd_smoothing(const ExperimentConfig& cfg, const RunOptions& opts) {
    prepare(opts);
    const QuadratureRule quad = cfg.quadrature_rule();
    const DensityGrid h = DensityGrid::from_function(
        cfg.grid_n, cfg.smoothing.test_function == "smooth" ? smooth_h : indicator_h);
    const std::vector<SmoothingRow> rows =
        smoothing_profile(h, cfg.fields, quad, cfg.smoothing.applications, transfer_options(cfg, opts));
    std::string csv = "k,gradient_l1,hessian_l1\n";
    json jrows = json::array();
    char buf[128];
    for (const SmoothingRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", r.k, r.gradient_l1, r.hessian_l1);
        csv += buf;
        jrows.push_back({{"k", r.k}, {"gradient_l1", r.gradient_l1}, {"hessian_l1", r.hessian_l1}});
    }
    write_text(path_in(opts, "smoothing.csv"), csv);
    json report{{"rows", jrows}, {"test_function", cfg.smoothing.test_function}, {"config", config_to_json(cfg)}};
    if (quad.exponential_law()) {
        IbpOptions io;
        io.flow = flow_options(cfg);
        io.threads = opts.threads;
        const L1GradientBound kb = l1_gradient_bound(h, cfg.fields.u0, cfg.fields.u1, quad, io);
        report["K_hat"] = kb.k_hat;
        report["ibp_gradient_l1"] = kb.gradient_l1;
    }
    write_json(opts, "smoothing.json", report);
    std::fputs(csv.c_str(), stdout);
    return kExitOk;
}

int cmd_special_flow(const ExperimentConfig& cfg, const RunOptions& opts) {
    prepare(opts);
    const SpecialFlowSpec sf = cfg.special_flow_spec();
    const GrowthReport g = growth_report(sf, cfg.special_flow.t_max, cfg.special_flow.samples, cfg.seed);
    write_text(path_in(opts, "growth.csv"), growth_report_csv(g));
    const bool pass = g.fitted_exponent <= cfg.special_flow.growth_exponent_max;
    long worst = 0;
    for (const GrowthRow& r : g.rows) worst = std::max(worst, r.max_crossings);
    write_json(opts, "special_flow.json",
               {{"fitted_exponent", g.fitted_exponent},
                {"threshold", cfg.special_flow.growth_exponent_max},
                {"status", pass ? "PASS" : "FAIL"},
                {"h_min", sf.h_min()},
                {"h_max", sf.h_max()},
                {"max_crossings", worst},
                {"config", config_to_json(cfg)}});
    std::printf("special-flow: fitted exponent %.4f (<= %.2f) %s\n", g.fitted_exponent,
                cfg.special_flow.growth_exponent_max, pass ? "PASS" : "FAIL");
    return pass ? kExitOk : kExitVerification;
}

int cmd_check_transversality(const ExperimentConfig& cfg, const RunOptions& opts) {
    prepare(opts);
    const TransversalityReport r = check_transversality(cfg.fields.u0, cfg.fields.u1, cfg.transversality.resolution,
                                                        cfg.transversality.threshold);
    write_json(opts, "transversality.json",
               {{"min_abs_det", r.min_abs_det},
                {"argmin", {r.argmin.x1(), r.argmin.x2()}},
                {"resolution", r.resolution},
                {"threshold", r.threshold},
                {"status", r.pass ? "PASS" : "FAIL"},
                {"config", config_to_json(cfg)}});
    std::printf("check-transversality: min |det U| = %.6g, %s\n", r.min_abs_det, r.pass ? "PASS" : "FAIL");
    return r.pass ? kExitOk : kExitVerification;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Randomly switched two-flow system on the 2-torus"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    int threads = 1;
    std::uint64_t seed = 0;

    using Cmd = int (*)(const ExperimentConfig&, const RunOptions&);
    const std::vector<std::pair<std::string, Cmd>> commands = {
        {"simulate", cmd_simulate},
        {"solve", cmd_solve},
        {"verify-ibp", cmd_verify},
        {"smoothing", cmd_smoothing},
        {"special-flow", cmd_special_flow},
        {"check-transversality", cmd_check_transversality},
    };
    std::vector<std::pair<CLI::App*, CLI::Option*>> subs;
    for (const auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c.first);
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (default: output_dir from the config)");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        subs.emplace_back(sub, sub->add_option("--seed", seed, "overrides the config seed"));
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    for (std::size_t i = 0; i < commands.size(); ++i) {
        if (!subs[i].first->parsed()) continue;
        try {
            ExperimentConfig cfg = load_config(config_path);
            if (subs[i].second->count() > 0) cfg.seed = seed;
            RunOptions ro;
            ro.out_dir = out_dir.empty() ? cfg.output_dir : out_dir;
            ro.threads = threads;
            return commands[i].second(cfg, ro);
        } catch (const ConfigError& e) {
            std::fprintf(stderr, "config error: %s\n", e.what());
            return kExitConfig;
        } catch (const std::invalid_argument& e) {
            std::fprintf(stderr, "config error: %s\n", e.what());
            return kExitConfig;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "numerical failure: %s\n", e.what());
            return kExitNumerical;
        }
    }
    return kExitConfig;
}

}  // namespace torswitch
