#pragma once

#include <pdcbo/lattice.hpp>
#include <pdcbo/problems/problem.hpp>
#include <pdcbo/trace.hpp>

#include <string>
#include <vector>

namespace pdcbo::metrics {

/// Feasible lattice minimiser theta*(z) of the true problem at one context.
struct OracleSolution {
    Index index = 0;
    Vector theta_star;
    double f_star = 0.0;
};

/// Exhaustive search over grid; throws InfeasibleContextError if no node is feasible.
OracleSolution oracle_optimum(const problems::ProblemInstance& problem, const Vector& z, const Lattice& grid);

/// Same search over values already evaluated at every grid node (values[j] at node j).
OracleSolution oracle_from_values(const std::vector<problems::TrueValues>& values, const Lattice& grid);

/// Running contextual regret and summed constraint values.
struct MetricsAccumulator {
    double regret_cum = 0.0;
    Vector violation_cum;
    std::vector<double> regret_history;
    std::vector<Vector> violation_history;

    explicit MetricsAccumulator(Index n_constraints = 1) : violation_cum(Vector::Zero(n_constraints)) {}

    long steps() const { return static_cast<long>(regret_history.size()); }

    /// V_T = || [sum_t g(theta_t, z_t)]^+ ||.
    double violation() const { return violation_cum.cwiseMax(0.0).norm(); }
};

void update_metrics(MetricsAccumulator& acc, double true_f, double f_star, const Vector& true_g);

/// Uniform Slater margin estimated over a finite set of contexts.
struct SlaterReport {
    /// min over contexts of max over theta of min_i(-g_i); the margin xi when positive.
    double xi = 0.0;
    /// argmax over theta of the worst-case margin min_z min_i(-g_i): a context-independent seed.
    Index seed_index = 0;
    Vector seed;
    double seed_margin = 0.0;
};

/// constraint_scale (optional, length N) divides each g_i before margins are taken.
SlaterReport uniform_slater(const problems::ProblemInstance& problem,
                            const Lattice& grid,
                            const Matrix& contexts,
                            const Vector& constraint_scale = Vector());

/// max |f| and max |g_i| over grid x contexts (objective first).
Vector sup_norms(const problems::ProblemInstance& problem, const Lattice& grid, const Matrix& contexts);

/// Cumulative posterior-std bound sum_t sigma_{i,t-1}(x_t) <= sqrt(4 (T + 2) gamma_{i,T}).
struct SigmaBoundEntry {
    double lhs = 0.0;
    double gamma = 0.0;
    double rhs = 0.0;           ///< with the greedy estimate as gamma
    double rhs_certified = 0.0; ///< with gamma / (1 - 1/e), an upper bound on the grid optimum
    bool flagged = false;       ///< lhs exceeds rhs_certified
};

struct SigmaBoundReport {
    long steps = 0;
    std::vector<SigmaBoundEntry> functions;
    bool holds() const;
};

/// gamma_per_function[i] is the greedy gamma_{i,T} for the trace's horizon.
SigmaBoundReport check_sigma_sum_bound(const ExperimentTrace& trace, const std::vector<double>& gamma_per_function);

/// max_t 1/2 ||lambda_t||^2 against C_V(eta) for every epoch of a theory-mode trace.
struct DualBoundReport {
    bool skipped = false;
    std::string note;
    double max_value = 0.0;
    double bound = 0.0;
    long worst_step = 0;
    bool holds = true;
};

DualBoundReport check_dual_bound(const ExperimentTrace& trace);

/// C_V(eta) = N/2 (4 C0/(eta xi) + 4 |C|^2/xi)^2 + 2 C0/eta + 2 |C|^2.
double dual_bound_constant(Index n_constraints, double c0, double c_norm, double xi, double eta);

} // namespace pdcbo::metrics
