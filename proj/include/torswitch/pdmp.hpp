#pragma once

// Simulation of the switching process (X_t, A_t): X follows the flow of
// u_{A_t}, and A flips at the end of each gap drawn from the switching law.

#include <cstdint>
#include <vector>

#include "torswitch/density_grid.hpp"
#include "torswitch/flows.hpp"
#include "torswitch/switching_law.hpp"
#include "torswitch/torus.hpp"
#include "torswitch/vector_fields.hpp"

namespace torswitch {

struct SwitchingConfig {
    FieldPair fields = constant_pair();
    SwitchingLaw law = SwitchingLaw::exponential(1.0);
    std::uint64_t seed = 0;
    FlowOptions flow;
};

/// Entry k: time of the k-th switch, the position there and the mode that
/// starts. Entry 0 is (0, x0, mode0). Segment k runs from entry k to k+1.
struct SwitchRecord {
    double time = 0.0;
    TorusPoint position;
    int mode = 0;
};

struct Trajectory {
    std::vector<SwitchRecord> records;
    double total_time = 0.0;
};

/// Gaps come from CounterRng::stream(cfg.seed, index). Flow failures are
/// rethrown as IntegrationError naming the switch.
Trajectory sample_trajectory(const SwitchingConfig& cfg, const TorusPoint& x0, int mode0, long n_switches,
                             std::uint64_t index = 0);

/// `count` trajectories with uniform random starts, mode0 = index % 2.
std::vector<Trajectory> sample_trajectories(const SwitchingConfig& cfg, int count, long n_switches_each,
                                            int threads = 1);

/// Z_0 = z0, Z_{k+1} = Phi_0^{T_k}(Phi_1^{S_k}(Z_k)); returns n_steps + 1 points.
std::vector<TorusPoint> embedded_chain(const SwitchingConfig& cfg, const TorusPoint& z0, long n_steps,
                                       std::uint64_t index = 0);

struct ChainHistogramOptions {
    int chains = 8;
    long steps_per_chain = 1000;
    long burn_in = 100;
    int threads = 1;
};

/// Normalized histogram of the embedded chain on an n x n grid, pooled over
/// independent chains. Chain c uses stream index c, starts uniformly at
/// random, and discards z0 and its first burn_in steps.
DensityGrid chain_histogram(const SwitchingConfig& cfg, int grid_n, const ChainHistogramOptions& opts);

/// Time-weighted occupation of `mode`: every segment in that mode is cut into
/// pieces of length dt (the last one shorter), each binned at its midpoint
/// with its length as weight. Normalized to unit mass. Throws
/// std::invalid_argument when no time was spent in the mode.
DensityGrid occupation_density(const std::vector<Trajectory>& trajectories, const FieldPair& fields, int grid_n,
                               int mode, double dt = 1e-2, const FlowOptions& flow = {});

/// Grid cell containing a point.
std::size_t cell_index(const TorusPoint& p, int n);

}  // namespace torswitch
