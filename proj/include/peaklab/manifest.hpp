#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace peaklab {

// Every command records what it produced: resolved config, seed, config digest,
// tool version, wall-clock bounds and a digest per output file.
struct RunManifest {
    std::string command;
    std::string tool_version;
    std::uint64_t seed = 0;
    std::string config_hash;
    nlohmann::json config;
    std::string started_utc;
    std::string finished_utc;

    struct Output {
        std::string path; // relative to the manifest directory
        std::uint64_t bytes = 0;
        std::string digest; // fnv1a-64 hex of the file contents
    };
    std::vector<Output> outputs;

    void add_output(const std::string& dir, const std::string& name);
    void write(const std::string& dir) const;
};

std::string utc_timestamp();
std::string tool_version();

} // namespace peaklab
