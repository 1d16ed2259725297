#pragma once

#include <ostream>
#include <string>

#include "ipdiff/config.hpp"

namespace ipdiff {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitNumerical = 3 };

/// One ensemble and its plateau estimate. Writes <name>_estimate.csv,
/// <name>_ktrace.csv, <name>_stats.json and <name>_summary.json.
int cmd_simulate(const Config& cfg, std::ostream& log);

/// Parameter sweep (<name>_sweep.csv/.json) or, with study =
/// white_noise_limit, the delta study (<name>_limit.csv/.json).
int cmd_sweep(const Config& cfg, std::ostream& log);

/// Flow, rank, Lyapunov and centering checks into <name>_validate.json.
/// Exit 0 iff every hard check passes.
int cmd_validate(const Config& cfg, std::ostream& log);

enum class Command { Simulate, Sweep, Validate };

/// Loads the config, applies overrides and runs the command, mapping
/// configuration errors to exit 2 and numerical failures to exit 3.
int run_command(Command cmd, const std::string& config_path, const Overrides& overrides, std::ostream& log,
                std::ostream& err);

}  // namespace ipdiff
