#pragma once

#include <pdcbo/trace.hpp>

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace pdcbo::bench {

/**
 * Trace CSV layout, one row per step, columns in this order:
 *
 *   t, grid_index, theta_1..theta_n, z_1..z_m, y_f, y_g1..y_gN, f_true, g_true_1..g_true_N,
 *   f_star, regret, regret_cum, g_cum_1..g_cum_N, lambda_1..lambda_N,
 *   lambda_next_1..lambda_next_N, lcb_f, lcb_g_1..lcb_g_N, sigma_f, sigma_g_1..sigma_g_N,
 *   primal_value
 *
 * Reals are written with 17 significant digits so parsing restores them exactly.
 * Metadata lives in a JSON sidecar next to the CSV (<name>.meta.json).
 */
std::vector<std::string> trace_columns(Index n_theta, Index n_z, Index n_constraints);

void write_trace_csv(std::ostream& out, const ExperimentTrace& trace);
std::string trace_csv_string(const ExperimentTrace& trace);

/// Parses rows; the dimensions in trace.meta are set from the header.
ExperimentTrace read_trace_csv(std::istream& in);

nlohmann::json metadata_json(const TraceMetadata& meta);
TraceMetadata metadata_from_json(const nlohmann::json& j);

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

/// Writes the CSV and its metadata sidecar.
void save_trace(const std::filesystem::path& csv_path, const ExperimentTrace& trace);
ExperimentTrace load_trace(const std::filesystem::path& csv_path);

/// Sidecar text with wall time removed, for replay comparison.
std::string stable_metadata_text(const TraceMetadata& meta);

} // namespace pdcbo::bench
