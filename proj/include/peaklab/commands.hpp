#pragma once

#include <string>
#include <vector>

#include "peaklab/config.hpp"

namespace peaklab {

struct CliOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> inputs; // estimate: moments.csv files
    std::optional<std::uint64_t> seed_override;
    int workers = 0; // 0 = hardware concurrency
    bool plot = false;
    bool dry_run = false;
};

// Subcommand bodies. Each validates, computes, writes its outputs plus a
// manifest.json, and returns the process exit code (0 on success; exceptions
// are translated by the caller: ConfigError -> 2, NumericalError -> 3, IoError -> 4).
int cmd_bounds(const CliOptions& opt);
int cmd_oracle(const CliOptions& opt);
int cmd_simulate(const CliOptions& opt);
int cmd_estimate(const CliOptions& opt);
int cmd_validate(const CliOptions& opt);

int dispatch_command(const std::string& name, const CliOptions& opt);

} // namespace peaklab
