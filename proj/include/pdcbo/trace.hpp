#pragma once

#include <pdcbo/common.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pdcbo {

/**
 * One executed step. Vectors over functions put the objective first
 * (index 0) followed by the N constraints; vectors over constraints have length N.
 * lcb_*, sigma and primal_value are in model units (observation / output scale).
 */
struct TraceRow {
    long t = 0;
    Index grid_index = 0;
    Vector z;
    Vector theta;
    Vector y;          ///< noisy observations, N + 1
    double f_true = 0.0;
    Vector g_true;     ///< N
    double f_star = 0.0;
    double regret = 0.0;
    double regret_cum = 0.0;
    Vector g_cum;      ///< running sum of g_true, N
    Vector lambda;     ///< dual state used by the primal step, N
    Vector lambda_next;///< dual state after the dual step, N
    double lcb_f = 0.0;
    Vector lcb_g;      ///< N
    Vector sigma;      ///< posterior std before conditioning, N + 1
    double primal_value = 0.0;

    bool operator==(const TraceRow& o) const;
};

inline bool same_vector(const Vector& a, const Vector& b)
{
    return a.size() == b.size() && (a.size() == 0 || a == b);
}

inline bool TraceRow::operator==(const TraceRow& o) const
{
    return t == o.t && grid_index == o.grid_index && same_vector(z, o.z) && same_vector(theta, o.theta)
        && same_vector(y, o.y) && f_true == o.f_true && same_vector(g_true, o.g_true) && f_star == o.f_star
        && regret == o.regret && regret_cum == o.regret_cum && same_vector(g_cum, o.g_cum)
        && same_vector(lambda, o.lambda) && same_vector(lambda_next, o.lambda_next) && lcb_f == o.lcb_f
        && same_vector(lcb_g, o.lcb_g) && same_vector(sigma, o.sigma) && primal_value == o.primal_value;
}

/// Constants of one run segment (the whole run, or one doubling epoch).
struct EpochInfo {
    long start_step = 1;
    long length = 0;
    long horizon = 0;
    double eta = 0.0;
    double epsilon = 0.0;
    double lambda1 = 0.0;     ///< every component of the initial dual vector
    double dual_bound = 0.0;  ///< C_V(eta); 0 when not applicable
    bool horizon_too_short = false;

    bool operator==(const EpochInfo&) const = default;
};

struct TraceMetadata {
    std::string algorithm;
    std::string schedule_mode; ///< "theory", "practical" or empty for baselines
    std::string problem;
    long replicate = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
    Index n_theta = 0;
    Index n_z = 0;
    Index n_constraints = 0;
    std::vector<EpochInfo> epochs;
    double wall_time_s = 0.0;
    std::map<std::string, double> values; ///< scalar diagnostics (xi, gamma estimates, ...)

    bool operator==(const TraceMetadata&) const = default;
};

struct ExperimentTrace {
    TraceMetadata meta;
    std::vector<TraceRow> rows;

    long steps() const { return static_cast<long>(rows.size()); }
    bool operator==(const ExperimentTrace&) const = default;
};

} // namespace pdcbo
