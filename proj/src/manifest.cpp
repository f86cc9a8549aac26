#include "peaklab/manifest.hpp"

#include <ctime>
#include <fstream>
#include <sstream>

#include "peaklab/common.hpp"

namespace peaklab {

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string tool_version() { return "peaklab 1.0.0"; }

void RunManifest::add_output(const std::string& dir, const std::string& name) {
    const std::string full = dir + "/" + name;
    std::ifstream in(full, std::ios::binary);
    if (!in) throw IoError("manifest: cannot read output file " + full);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string bytes_str = buf.str();
    Output o;
    o.path = name;
    o.bytes = bytes_str.size();
    o.digest = hex64(fnv1a64(bytes_str));
    outputs.push_back(std::move(o));
}

void RunManifest::write(const std::string& dir) const {
    nlohmann::json j;
    j["command"] = command;
    j["tool_version"] = tool_version;
    j["seed"] = seed;
    j["config_hash"] = config_hash;
    j["config"] = config;
    j["started_utc"] = started_utc;
    j["finished_utc"] = finished_utc;
    j["outputs"] = nlohmann::json::array();
    for (const Output& o : outputs)
        j["outputs"].push_back({{"path", o.path}, {"bytes", o.bytes}, {"digest", o.digest}});
    const std::string full = dir + "/manifest.json";
    std::ofstream out(full, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write manifest: " + full);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + full);
}

} // namespace peaklab
