#include <pdcbo/baselines/baselines.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace pdcbo::baselines {

namespace {
    double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
    double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
    Vector no_clip(Index n) { return Vector::Constant(n, std::numeric_limits<double>::infinity()); }
} // namespace

double expected_improvement(double mu, double sigma, double incumbent)
{
    const double gap = incumbent - mu;
    if (!(sigma > 0.0))
        return std::max(gap, 0.0);
    const double u = gap / sigma;
    return gap * normal_cdf(u) + sigma * normal_pdf(u);
}

double feasibility_probability(double mu, double sigma)
{
    if (!(sigma > 0.0))
        return mu <= 0.0 ? 1.0 : 0.0;
    return normal_cdf(-mu / sigma);
}

Vector cei_acquisition(const Matrix& mean, const Matrix& sigma, std::optional<double> incumbent)
{
    const Index m = mean.cols();
    Vector acq(m);
    for (Index j = 0; j < m; ++j) {
        double a = incumbent ? expected_improvement(mean(0, j), sigma(0, j), *incumbent) : 1.0;
        for (Index i = 1; i < mean.rows(); ++i)
            a *= feasibility_probability(mean(i, j), sigma(i, j));
        acq(j) = a;
    }
    return acq;
}

Index cei_step(const CeiState& state, const solver::GridBounds& bounds, double* acquisition)
{
    if (bounds.size() == 0)
        throw std::invalid_argument("cei_step: empty grid");
    const Vector acq = cei_acquisition(bounds.mean, bounds.sigma, state.best_feasible_value);
    Index best = 0;
    for (Index j = 1; j < acq.size(); ++j)
        if (acq(j) > acq(best))
            best = j;
    if (acquisition != nullptr)
        *acquisition = acq(best);
    return best;
}

std::optional<double> cei_incumbent(const solver::SurrogateModels& models)
{
    if (models.size() == 0)
        return std::nullopt;
    const auto x = models.model(0).inputs();
    const auto y = models.model(0).observations();
    Eigen::Array<bool, Eigen::Dynamic, 1> feasible = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(x.cols(), true);
    for (Index i = 1; i < models.n_functions(); ++i)
        feasible = feasible && (models.model(i).predict_mean(x).array() <= 0.0);
    std::optional<double> best;
    for (Index s = 0; s < x.cols(); ++s)
        if (feasible(s) && (!best || y(s) < *best))
            best = y(s);
    return best;
}

Vector CeiPolicy::clip() const { return no_clip(_n_functions); }

solver::Selection CeiPolicy::select(const solver::StepView& view)
{
    solver::Selection sel;
    sel.grid_index = cei_step(_state, view.bounds, &sel.primal_value);
    return sel;
}

void CeiPolicy::observe(const solver::StepView& view, const solver::Selection&, const Vector&)
{
    _state.best_feasible_value = cei_incumbent(view.models);
}

std::vector<Index> safe_set(const solver::GridBounds& bounds, Index seed_index)
{
    std::vector<Index> out;
    const Index nc = bounds.n_functions() - 1;
    for (Index j = 0; j < bounds.size(); ++j) {
        const bool safe = nc == 0 || bounds.upper.col(j).tail(nc).maxCoeff() <= 0.0;
        if (safe || j == seed_index)
            out.push_back(j);
    }
    return out;
}

Index safe_bo_step(const SafeBoState& state, const solver::GridBounds& bounds, const Lattice& grid)
{
    if (state.seed_index < 0 || state.seed_index >= bounds.size())
        throw std::invalid_argument("safe_bo_step: safe seed is not on the grid");
    const std::vector<Index> safe = safe_set(bounds, state.seed_index);
    std::vector<bool> in_safe(std::size_t(bounds.size()), false);
    for (Index j : safe)
        in_safe[std::size_t(j)] = true;

    double best_upper = std::numeric_limits<double>::infinity();
    for (Index j : safe)
        best_upper = std::min(best_upper, bounds.upper(0, j));

    Index choice = -1;
    double widest = -std::numeric_limits<double>::infinity();
    for (Index j : safe) {
        bool candidate = bounds.lower(0, j) <= best_upper;
        if (!candidate)
            for (Index nb : grid.neighbours(j))
                if (!in_safe[std::size_t(nb)]) {
                    candidate = true;
                    break;
                }
        const double width = bounds.upper(0, j) - bounds.lower(0, j);
        if (candidate && width > widest) {
            widest = width;
            choice = j;
        }
    }
    // the safe minimiser of u^f always qualifies, so choice is set
    return choice;
}

Vector SafeBoPolicy::clip() const { return no_clip(_n_functions); }

solver::Selection SafeBoPolicy::select(const solver::StepView& view)
{
    solver::Selection sel;
    sel.grid_index = safe_bo_step(_state, view.bounds, view.grid);
    sel.primal_value = view.bounds.upper(0, sel.grid_index) - view.bounds.lower(0, sel.grid_index);
    return sel;
}

} // namespace pdcbo::baselines
