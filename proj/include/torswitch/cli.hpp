#pragma once

#include <string>

#include "torswitch/config.hpp"

namespace torswitch {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitNumerical = 3,
    kExitNotConverged = 4,
    kExitVerification = 5,
};

struct RunOptions {
    std::string out_dir;  // created when missing
    int threads = 1;
};

// Each command writes its artifacts into opts.out_dir and returns an exit code.
// Library exceptions propagate; run_cli maps them to exit codes.
int cmd_simulate(const ExperimentConfig& cfg, const RunOptions& opts);
int cmd_solve(const ExperimentConfig& cfg, const RunOptions& opts);
int cmd_verify(const ExperimentConfig& cfg, const RunOptions& opts);
int cmd_smoothing(const ExperimentConfig& cfg, const RunOptions& opts);
int cmd_special_flow(const ExperimentConfig& cfg, const RunOptions& opts);
int cmd_check_transversality(const ExperimentConfig& cfg, const RunOptions& opts);

// torswitch <simulate|solve|verify-ibp|smoothing|special-flow|check-transversality>
//           --config PATH [--out DIR] [--threads N] [--seed S]
int run_cli(int argc, char** argv);

}  // namespace torswitch
