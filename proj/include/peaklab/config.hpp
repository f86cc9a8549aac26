#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "peaklab/renewal.hpp"
#include "peaklab/simulate.hpp"

namespace peaklab {

// Fully resolved run description parsed from the strict five-section JSON
// config {model, sigma, initial, grid, run}. Unknown keys anywhere are errors.
struct RunPlan {
    LevyModel model;
    Equation equation = Equation::Heat;
    SigmaSpec sigma;
    InitialData initial;
    GridSpec grid;

    int nu = 2;
    long n_paths = 0;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::HeatMildSpectral;
    double window = 0.5;
    double delta = 0.02;
    std::vector<double> alpha_grid;
    std::vector<double> c_values;    // bounds evaluation points, default {0}
    std::vector<double> beta_values; // lower_condition rates, default small grid
    bool dump_paths = false;         // simulate: also write raw path fields

    KernelSpec kernel_spec() const;
    SimConfig sim_config() const;
    RenewalProblem renewal_problem() const;
};

RunPlan parse_config(const nlohmann::json& doc);
RunPlan load_config(const std::string& path);

// Canonical JSON round-trip of the resolved plan; hashing this string is the
// config digest recorded in manifests and path fields.
nlohmann::json plan_to_json(const RunPlan& plan);
std::string canonical_config_string(const RunPlan& plan);
std::uint64_t config_digest(const RunPlan& plan);

// Serialisation helpers shared with SimConfig::config_hash.
nlohmann::json sim_config_to_json(const SimConfig& config);

} // namespace peaklab
