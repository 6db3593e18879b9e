#include "torswitch/pdmp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "torswitch/errors.hpp"
#include "torswitch/parallel.hpp"
#include "torswitch/rng.hpp"

namespace torswitch {

namespace {

const VectorFieldSpec& field_of(const FieldPair& p, int mode) { return mode == 0 ? p.u0 : p.u1; }

void check_mode(int mode) {
    if (mode != 0 && mode != 1) throw std::invalid_argument("mode must be 0 or 1, got " + std::to_string(mode));
}

// Chain streams are kept apart from trajectory streams of the same seed.
constexpr std::uint64_t kChainSalt = 0x6a09e667f3bcc909ULL;

}  // namespace

std::size_t cell_index(const TorusPoint& p, int n) {
    const int j = std::min(n - 1, static_cast<int>(p.x1() * n));
    const int k = std::min(n - 1, static_cast<int>(p.x2() * n));
    return static_cast<std::size_t>(j) * n + k;
}

Trajectory sample_trajectory(const SwitchingConfig& cfg, const TorusPoint& x0, int mode0, long n_switches,
                             std::uint64_t index) {
    check_mode(mode0);
    if (n_switches < 1) throw std::invalid_argument("n_switches must be >= 1");
    CounterRng rng = CounterRng::stream(cfg.seed, index);
    Trajectory tr;
    tr.records.reserve(static_cast<std::size_t>(n_switches) + 1);
    tr.records.push_back({0.0, x0, mode0});
    double time = 0.0;
    Vec2 x = x0.lift();
    int mode = mode0;
    for (long k = 1; k <= n_switches; ++k) {
        const double gap = cfg.law.sample(rng);
        try {
            x = advance_point(field_of(cfg.fields, mode), x, gap, cfg.flow.max_step);
        } catch (const NumericalError& e) {
            throw IntegrationError(std::string(e.what()) + " (switch " + std::to_string(k) + ")");
        }
        const TorusPoint p(x);
        x = p.lift();
        time += gap;
        mode = 1 - mode;
        tr.records.push_back({time, p, mode});
    }
    tr.total_time = time;
    return tr;
}

std::vector<Trajectory> sample_trajectories(const SwitchingConfig& cfg, int count, long n_switches_each,
                                            int threads) {
    if (count < 1) throw std::invalid_argument("trajectory count must be >= 1");
    std::vector<Trajectory> out(count);
    parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t i) {
        CounterRng start = CounterRng::stream(cfg.seed ^ kChainSalt, ~static_cast<std::uint64_t>(i));
        const TorusPoint x0(start.uniform(), start.uniform());
        out[i] = sample_trajectory(cfg, x0, static_cast<int>(i % 2), n_switches_each, i);
    });
    return out;
}

namespace {

template <class Visit>
void run_chain(const SwitchingConfig& cfg, const TorusPoint& z0, long n_steps, std::uint64_t index, Visit&& visit) {
    CounterRng rng = CounterRng::stream(cfg.seed ^ kChainSalt, index);
    Vec2 z = z0.lift();
    visit(z0);
    for (long k = 1; k <= n_steps; ++k) {
        const double s = cfg.law.sample(rng);
        const double t = cfg.law.sample(rng);
        try {
            z = advance_point(cfg.fields.u1, z, s, cfg.flow.max_step);
            z = advance_point(cfg.fields.u0, z, t, cfg.flow.max_step);
        } catch (const NumericalError& e) {
            throw IntegrationError(std::string(e.what()) + " (chain step " + std::to_string(k) + ")");
        }
        const TorusPoint p(z);
        z = p.lift();
        visit(p);
    }
}

}  // namespace

std::vector<TorusPoint> embedded_chain(const SwitchingConfig& cfg, const TorusPoint& z0, long n_steps,
                                       std::uint64_t index) {
    if (n_steps < 0) throw std::invalid_argument("n_steps must be >= 0");
    std::vector<TorusPoint> out;
    out.reserve(static_cast<std::size_t>(n_steps) + 1);
    run_chain(cfg, z0, n_steps, index, [&](const TorusPoint& p) { out.push_back(p); });
    return out;
}

DensityGrid chain_histogram(const SwitchingConfig& cfg, int grid_n, const ChainHistogramOptions& opts) {
    if (grid_n < 1) throw std::invalid_argument("grid size must be >= 1");
    if (opts.chains < 1 || opts.steps_per_chain < 1 || opts.burn_in < 0)
        throw std::invalid_argument("chain_histogram needs chains >= 1, steps >= 1, burn_in >= 0");
    const std::size_t cells = static_cast<std::size_t>(grid_n) * grid_n;
    std::vector<std::vector<std::uint64_t>> counts(opts.chains);
    parallel_for(static_cast<std::size_t>(opts.chains), opts.threads, [&](std::size_t c) {
        std::vector<std::uint64_t>& mine = counts[c];
        mine.assign(cells, 0);
        CounterRng start = CounterRng::stream(cfg.seed, ~static_cast<std::uint64_t>(c));
        const TorusPoint z0(start.uniform(), start.uniform());
        long k = 0;
        run_chain(cfg, z0, opts.burn_in + opts.steps_per_chain, c, [&](const TorusPoint& p) {
            if (k++ > opts.burn_in) ++mine[cell_index(p, grid_n)];
        });
    });
    DensityGrid g(grid_n);
    std::uint64_t total = 0;
    for (const auto& cnt : counts)
        for (std::size_t i = 0; i < cells; ++i) {
            g.values()[i] += static_cast<double>(cnt[i]);
            total += cnt[i];
        }
    const double scale = static_cast<double>(cells) / static_cast<double>(total);
    for (double& v : g.values()) v *= scale;
    return g;
}

DensityGrid occupation_density(const std::vector<Trajectory>& trajectories, const FieldPair& fields, int grid_n,
                               int mode, double dt, const FlowOptions& flow) {
    check_mode(mode);
    if (grid_n < 1) throw std::invalid_argument("grid size must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    const VectorFieldSpec& u = field_of(fields, mode);
    const std::size_t cells = static_cast<std::size_t>(grid_n) * grid_n;
    std::vector<double> acc(cells, 0.0);
    double total = 0.0;
    for (const Trajectory& tr : trajectories) {
        for (std::size_t k = 0; k + 1 < tr.records.size(); ++k) {
            const SwitchRecord& r = tr.records[k];
            if (r.mode != mode) continue;
            const double len = tr.records[k + 1].time - r.time;
            Vec2 x = r.position.lift();
            double done = 0.0;  // time at which x is the current position
            for (double a = 0.0; a < len; a += dt) {
                const double piece = std::min(dt, len - a);
                x = advance_point(u, x, a + 0.5 * piece - done, flow.max_step);
                done = a + 0.5 * piece;
                acc[cell_index(TorusPoint(x), grid_n)] += piece;
            }
            total += len;
        }
    }
    if (!(total > 0.0)) throw std::invalid_argument("no occupation time in mode " + std::to_string(mode));
    DensityGrid g(grid_n);
    const double scale = static_cast<double>(cells) / total;
    for (std::size_t i = 0; i < cells; ++i) g.values()[i] = acc[i] * scale;
    return g;
}

}  // namespace torswitch
