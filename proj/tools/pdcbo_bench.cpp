// pdcbo_bench: run, replay and report PDCBO benchmark suites.
//
//   pdcbo_bench run <config.json> [--horizon T] [--replicates R] [--seed S] [--output DIR]
//   pdcbo_bench replay <trace-dir>
//   pdcbo_bench report <trace-dir>
//   pdcbo_bench figures <aggregate.csv> [--output DIR]
//
// PDCBO_WORKERS sets the worker count. Exit codes: 0 ok, 1 cell failures, 2 config error.

#include <pdcbo/bench/config.hpp>
#include <pdcbo/bench/figures.hpp>
#include <pdcbo/bench/suite.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace pdcbo::bench;

namespace {
constexpr int kOk = 0;
constexpr int kCellFailure = 1;
constexpr int kConfigError = 2;

int cmd_run(const std::string& path,
            std::optional<long> horizon,
            std::optional<long> replicates,
            std::optional<std::uint64_t> seed,
            std::optional<std::string> output)
{
    ExperimentConfig cfg = load_config(path);
    if (horizon)
        cfg.horizon = *horizon;
    if (replicates)
        cfg.replicates = *replicates;
    if (seed)
        cfg.base_seed = *seed;
    if (output)
        cfg.output_dir = *output;
    if (cfg.horizon < 1 || cfg.replicates < 1)
        throw ConfigError("horizon and replicates must be >= 1");

    const int workers = worker_count_from_env();
    std::cout << "suite " << cfg.name << ": " << cfg.algorithms.size() << " algorithms x " << cfg.replicates
              << " replicates, T=" << cfg.horizon << ", " << workers << " worker(s) -> " << cfg.output_dir << "\n";
    const SuiteResult res = run_suite(cfg, workers, &std::cout);
    std::cout << "aggregate: " << res.aggregate_path.string() << "\n";
    long failed = 0;
    for (const auto& c : res.cells)
        failed += c.ok ? 0 : 1;
    if (failed) {
        std::cout << failed << " cell(s) failed\n";
        return kCellFailure;
    }
    return kOk;
}

int cmd_replay(const std::string& dir)
{
    const ReplayResult res = replay_suite(dir, worker_count_from_env());
    for (const auto& m : res.mismatches)
        std::cout << "MISMATCH " << m.path.string() << ": " << m.what << "\n";
    std::cout << res.cells << " cell(s) replayed, " << res.mismatches.size() << " mismatch(es)\n";
    return res.identical() ? kOk : kCellFailure;
}

int cmd_report(const std::string& dir)
{
    bool ok = true;
    for (const auto& line : report_suite(dir)) {
        std::cout << (line.ok ? "ok    " : "FAIL  ") << line.check;
        if (!line.detail.empty())
            std::cout << "  (" << line.detail << ")";
        std::cout << "\n";
        ok = ok && line.ok;
    }
    std::cout << "aggregate rewritten: " << (fs::path(dir) / "aggregate.csv").string() << "\n";
    return ok ? kOk : kCellFailure;
}

int cmd_figures(const std::string& aggregate, std::optional<std::string> output)
{
    const fs::path out = output ? fs::path(*output) : fs::path(aggregate).parent_path() / "figures";
    for (const auto& p : emit_figures(aggregate, out))
        std::cout << p.string() << "\n";
    return kOk;
}
} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"PDCBO benchmark harness"};
    app.require_subcommand(1);

    std::string config_path, trace_dir, aggregate_path;
    std::optional<long> horizon, replicates;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output;

    auto* run = app.add_subcommand("run", "run every (algorithm x replicate) cell of a config");
    run->add_option("config", config_path, "experiment config (JSON)")->required();
    run->add_option("--horizon", horizon, "override the horizon T");
    run->add_option("--replicates", replicates, "override the replicate count");
    run->add_option("--seed", seed, "override the base seed");
    run->add_option("--output", output, "override the output directory");

    auto* replay = app.add_subcommand("replay", "re-run a suite directory and compare traces byte for byte");
    replay->add_option("trace-dir", trace_dir, "suite output directory")->required();

    auto* report = app.add_subcommand("report", "rebuild the aggregate and check trace invariants");
    report->add_option("trace-dir", trace_dir, "suite output directory")->required();

    auto* figures = app.add_subcommand("figures", "write SVG figures from an aggregate");
    figures->add_option("aggregate", aggregate_path, "aggregate.csv")->required();
    figures->add_option("--output", output, "figure directory (default: <aggregate dir>/figures)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*run)
            return cmd_run(config_path, horizon, replicates, seed, output);
        if (*replay)
            return cmd_replay(trace_dir);
        if (*report)
            return cmd_report(trace_dir);
        return cmd_figures(aggregate_path, output);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCellFailure;
    }
}
