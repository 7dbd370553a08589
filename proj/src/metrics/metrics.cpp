#include <pdcbo/metrics/metrics.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace pdcbo::metrics {

OracleSolution oracle_from_values(const std::vector<problems::TrueValues>& values, const Lattice& grid)
{
    if (static_cast<Index>(values.size()) != grid.size())
        throw std::invalid_argument("oracle_from_values: one value per grid node required");
    Index best = -1;
    double best_f = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < values.size(); ++j) {
        const auto& v = values[j];
        if ((v.g.array() > 0.0).any())
            continue;
        if (v.f < best_f) {
            best_f = v.f;
            best = static_cast<Index>(j);
        }
    }
    if (best < 0)
        throw InfeasibleContextError("no feasible lattice point for this context (Slater condition fails)");
    return {best, grid.point(best), best_f};
}

OracleSolution oracle_optimum(const problems::ProblemInstance& problem, const Vector& z, const Lattice& grid)
{
    return oracle_from_values(problem.evaluate_grid(grid.points(), z), grid);
}

void update_metrics(MetricsAccumulator& acc, double true_f, double f_star, const Vector& true_g)
{
    if (true_g.size() != acc.violation_cum.size())
        throw std::invalid_argument("update_metrics: constraint count mismatch");
    const double r = true_f - f_star;
    acc.regret_cum += r;
    acc.violation_cum += true_g;
    acc.regret_history.push_back(r);
    acc.violation_history.push_back(true_g);
}

SlaterReport uniform_slater(const problems::ProblemInstance& problem,
                            const Lattice& grid,
                            const Matrix& contexts,
                            const Vector& constraint_scale)
{
    if (contexts.cols() == 0)
        throw std::invalid_argument("uniform_slater: no contexts given");
    const Vector scale = constraint_scale.size() == 0 ? Vector(Vector::Ones(problem.n_constraints())) : constraint_scale;
    if (scale.size() != problem.n_constraints())
        throw std::invalid_argument("uniform_slater: one scale per constraint required");
    SlaterReport rep;
    rep.xi = std::numeric_limits<double>::infinity();
    Vector worst = Vector::Constant(grid.size(), std::numeric_limits<double>::infinity());
    for (Index c = 0; c < contexts.cols(); ++c) {
        const auto values = problem.evaluate_grid(grid.points(), contexts.col(c));
        double best_here = -std::numeric_limits<double>::infinity();
        for (Index j = 0; j < grid.size(); ++j) {
            const double margin = -values[std::size_t(j)].g.cwiseQuotient(scale).maxCoeff();
            best_here = std::max(best_here, margin);
            worst(j) = std::min(worst(j), margin);
        }
        rep.xi = std::min(rep.xi, best_here);
    }
    rep.seed_margin = worst.maxCoeff(&rep.seed_index);
    rep.seed = grid.point(rep.seed_index);
    return rep;
}

Vector sup_norms(const problems::ProblemInstance& problem, const Lattice& grid, const Matrix& contexts)
{
    Vector out = Vector::Zero(problem.n_constraints() + 1);
    for (Index c = 0; c < contexts.cols(); ++c) {
        for (const auto& v : problem.evaluate_grid(grid.points(), contexts.col(c))) {
            out(0) = std::max(out(0), std::abs(v.f));
            out.tail(v.g.size()) = out.tail(v.g.size()).cwiseMax(v.g.cwiseAbs());
        }
    }
    return out;
}

bool SigmaBoundReport::holds() const
{
    for (const auto& f : functions)
        if (f.flagged)
            return false;
    return true;
}

SigmaBoundReport check_sigma_sum_bound(const ExperimentTrace& trace, const std::vector<double>& gamma_per_function)
{
    const std::size_t n_fn = static_cast<std::size_t>(trace.meta.n_constraints + 1);
    if (gamma_per_function.size() != n_fn)
        throw std::invalid_argument("check_sigma_sum_bound: need one gamma per function");
    SigmaBoundReport rep;
    rep.steps = trace.steps();
    const double horizon = static_cast<double>(rep.steps);
    const double greedy_factor = 1.0 - std::exp(-1.0);
    for (std::size_t i = 0; i < n_fn; ++i) {
        SigmaBoundEntry e;
        for (const auto& row : trace.rows)
            e.lhs += row.sigma(Index(i));
        e.gamma = gamma_per_function[i];
        e.rhs = std::sqrt(4.0 * (horizon + 2.0) * e.gamma);
        e.rhs_certified = std::sqrt(4.0 * (horizon + 2.0) * e.gamma / greedy_factor);
        e.flagged = e.lhs > e.rhs_certified;
        rep.functions.push_back(e);
    }
    return rep;
}

double dual_bound_constant(Index n_constraints, double c0, double c_norm, double xi, double eta)
{
    const double inner = 4.0 * c0 / (eta * xi) + 4.0 * c_norm * c_norm / xi;
    return 0.5 * double(n_constraints) * inner * inner + 2.0 * c0 / eta + 2.0 * c_norm * c_norm;
}

DualBoundReport check_dual_bound(const ExperimentTrace& trace)
{
    DualBoundReport rep;
    if (trace.meta.schedule_mode != "theory") {
        rep.skipped = true;
        rep.note = "practical schedule (lambda_1 = 0, no Slater constants): dual bound not applicable";
        return rep;
    }
    if (trace.meta.epochs.empty()) {
        rep.skipped = true;
        rep.note = "trace carries no epoch constants";
        return rep;
    }
    double worst_ratio = -std::numeric_limits<double>::infinity();
    for (const auto& epoch : trace.meta.epochs) {
        const long first = epoch.start_step;
        const long last = epoch.start_step + epoch.length - 1;
        for (const auto& row : trace.rows) {
            if (row.t < first || row.t > last)
                continue;
            for (const Vector* lam : {&row.lambda, &row.lambda_next}) {
                const double v = 0.5 * lam->squaredNorm();
                const double ratio = v / epoch.dual_bound;
                if (ratio > worst_ratio) {
                    worst_ratio = ratio;
                    rep.max_value = v;
                    rep.bound = epoch.dual_bound;
                    rep.worst_step = row.t;
                }
                if (v > epoch.dual_bound)
                    rep.holds = false;
            }
        }
    }
    std::ostringstream note;
    note << "max 1/2|lambda|^2 = " << rep.max_value << " vs C_V = " << rep.bound << " (step " << rep.worst_step << ")";
    rep.note = note.str();
    return rep;
}

} // namespace pdcbo::metrics
