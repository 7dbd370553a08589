#pragma once

#include <pdcbo/gp/kernel.hpp>
#include <pdcbo/solver/pdcbo.hpp>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdcbo::bench {

/// Invalid or unreadable experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ProblemSpec {
    std::string family; ///< "gp_sampled" or "williams_otto"
    // gp_sampled
    Index n_constraints = 1;
    Box theta_box;
    Box z_box;
    std::vector<Index> anchor_resolution{21};
    gp::KernelSpecd kernel;
    // williams_otto
    Vector nominal_prices;
    double alpha = 0.2;
    // both
    double noise_sigma = 0.05;
};

struct AlgorithmSpec {
    std::string name;  ///< "pdcbo", "cei" or "safe_bo"
    std::string label; ///< unique per config; names trace files and aggregate rows
    solver::ScheduleConfig schedule;
    double beta_sqrt = 2.0; ///< safe_bo confidence multiplier
};

/**
 * A complete experiment: one problem family, a set of algorithms, replicates and
 * output location. Together with the code version it determines every output.
 */
struct ExperimentConfig {
    std::string name;
    ProblemSpec problem;
    std::vector<gp::KernelSpecd> kernels; ///< one per function, model units
    Vector noise_variance;
    Vector output_scale;
    std::vector<Index> grid_resolution;
    std::vector<Index> context_resolution{11};
    long horizon = 1;
    long replicates = 1;
    std::uint64_t base_seed = 0;
    std::string output_dir = "runs";
    double band_multiplier = 0.5;
    std::vector<AlgorithmSpec> algorithms;

    Index n_functions() const { return problem.family == "williams_otto" ? 3 : problem.n_constraints + 1; }
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& c);

/// FNV-1a hash of the canonical JSON without the output directory, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

} // namespace pdcbo::bench
