#pragma once

#include <pdcbo/bench/config.hpp>
#include <pdcbo/problems/problem.hpp>
#include <pdcbo/trace.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace pdcbo::bench {

/// Candidate grid over the problem's theta box (resolution broadcast over dimensions).
Lattice make_grid(const ExperimentConfig& cfg);

/// Context lattice over the z box used for Slater margins and sup norms.
Lattice make_context_lattice(const ExperimentConfig& cfg);

/// Seed driving contexts and noise of replicate r; shared by every algorithm.
std::uint64_t replicate_seed(const ExperimentConfig& cfg, long replicate);

/// Problem instance of replicate r. Williams-Otto uses one instance for every replicate.
problems::ProblemPtr make_problem(const ExperimentConfig& cfg, long replicate, const Lattice& grid);

/// Oracle constants of one instance, in model units.
struct InstanceConstants {
    Vector sup_norm; ///< objective first
    double xi = 0.0;
    Index slater_seed_index = 0;
    double slater_seed_margin = 0.0;
};

InstanceConstants instance_constants(const ExperimentConfig& cfg,
                                     const problems::ProblemInstance& problem,
                                     const Lattice& grid);

/// Runs one (algorithm, replicate) cell; deterministic given the config.
ExperimentTrace run_cell(const ExperimentConfig& cfg, const AlgorithmSpec& algorithm, long replicate);

std::filesystem::path trace_path(const std::filesystem::path& dir, const std::string& label, long replicate);

struct CellResult {
    std::string label;
    long replicate = 0;
    bool ok = false;
    std::string error;
    std::filesystem::path path;
};

struct SuiteResult {
    std::vector<CellResult> cells;
    std::filesystem::path aggregate_path;
    bool all_ok() const;
};

/// Worker count from PDCBO_WORKERS, else the hardware concurrency (at least 1).
int worker_count_from_env();

/**
 * Executes every (algorithm x replicate) cell on `workers` threads, writing
 * <output_dir>/config.json, traces/<label>_rNNN.csv (+ sidecar) and aggregate.csv.
 * Failed cells are recorded and skipped in the aggregate.
 */
SuiteResult run_suite(const ExperimentConfig& cfg, int workers, std::ostream* log = nullptr);

/// Per-step mean and standard deviation over replicates of one algorithm.
struct AggregateSeries {
    std::string label;
    long replicates = 0;
    std::vector<long> t;
    std::vector<double> regret_mean, regret_std;
    std::vector<double> cost_mean, cost_std; ///< cumulative sum of f_true
    std::vector<Vector> gsum_mean, gsum_std; ///< cumulative constraint value, per step
    std::vector<Vector> gavg_mean, gavg_std; ///< running average constraint value, per step
};

struct Aggregate {
    std::string name;
    std::string family;
    Index n_constraints = 0;
    double band_multiplier = 0.5;
    std::vector<AggregateSeries> series;
};

/// Traces of one label must share their length; the standard deviation is the sample one (0 for one replicate).
AggregateSeries aggregate_traces(const std::string& label, const std::vector<ExperimentTrace>& traces);

std::vector<std::string> aggregate_columns(Index n_constraints);
void write_aggregate(const std::filesystem::path& path, const Aggregate& agg);
Aggregate read_aggregate(const std::filesystem::path& path);

/// Loads every trace of a suite directory grouped by algorithm label (config order).
std::vector<std::pair<std::string, std::vector<ExperimentTrace>>> load_suite_traces(const std::filesystem::path& dir,
                                                                                    const ExperimentConfig& cfg);

struct ReplayMismatch {
    std::filesystem::path path;
    std::string what;
};

struct ReplayResult {
    long cells = 0;
    std::vector<ReplayMismatch> mismatches;
    bool identical() const { return mismatches.empty(); }
};

/// Re-runs every cell of <dir>/config.json and compares CSV bytes and metadata (wall time excluded).
ReplayResult replay_suite(const std::filesystem::path& dir, int workers);

/// One line of a trace-directory report.
struct ReportLine {
    std::string check;
    bool ok = true;
    std::string detail;
};

/**
 * Rebuilds aggregate.csv from persisted traces and checks per-trace invariants:
 * nonnegative duals, prefix-sum columns, the cumulative-sigma bound, the dual bound
 * of theory-mode runs and dual telescoping.
 */
std::vector<ReportLine> report_suite(const std::filesystem::path& dir);

} // namespace pdcbo::bench
