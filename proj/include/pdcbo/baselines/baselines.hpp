#pragma once

#include <pdcbo/solver/runner.hpp>

#include <optional>

namespace pdcbo::baselines {

/// Expected improvement below `incumbent` for a Gaussian N(mu, sigma^2); sigma = 0 gives max(incumbent - mu, 0).
double expected_improvement(double mu, double sigma, double incumbent);

/// Pr[g <= 0] for g ~ N(mu, sigma^2); sigma = 0 gives 1 when mu <= 0, else 0.
double feasibility_probability(double mu, double sigma);

/**
 * CEI acquisition EI(theta) * prod_i Pr[g_i <= 0] at every grid column, from posterior
 * means and standard deviations ((N + 1) x m, objective first). Without an incumbent
 * the acquisition is the feasibility probability alone.
 */
Vector cei_acquisition(const Matrix& mean, const Matrix& sigma, std::optional<double> incumbent);

struct CeiState {
    /// Lowest observed objective among evaluated inputs whose constraint posterior means are all <= 0.
    std::optional<double> best_feasible_value;
};

/// argmax of the CEI acquisition over the grid; ties to the lowest index.
Index cei_step(const CeiState& state, const solver::GridBounds& bounds, double* acquisition = nullptr);

/// Recomputes the incumbent from the current models and all observations.
std::optional<double> cei_incumbent(const solver::SurrogateModels& models);

class CeiPolicy final : public solver::Policy {
public:
    explicit CeiPolicy(Index n_functions) : _n_functions(n_functions) {}

    std::string name() const override { return "cei"; }
    Vector beta_sqrt(long) const override { return Vector::Ones(_n_functions); }
    Vector clip() const override;
    solver::Selection select(const solver::StepView& view) override;
    void observe(const solver::StepView& view, const solver::Selection& sel, const Vector& y) override;

    const CeiState& state() const { return _state; }

private:
    Index _n_functions;
    CeiState _state;
};

inline constexpr double kSafeBoBetaSqrt = 2.0;

struct SafeBoState {
    Index seed_index = 0; ///< grid index of the safe seed
    double beta_sqrt = kSafeBoBetaSqrt;
};

/// Grid indices with u^{g_i} <= 0 for every constraint, plus the seed (sorted).
std::vector<Index> safe_set(const solver::GridBounds& bounds, Index seed_index);

/**
 * Simplified contextual SafeOpt step: among safe points that are potential minimisers
 * (l^f below the best safe u^f) or expanders (a lattice neighbour outside the safe set),
 * pick the largest f-width u^f - l^f. Never leaves the safe set.
 */
Index safe_bo_step(const SafeBoState& state, const solver::GridBounds& bounds, const Lattice& grid);

class SafeBoPolicy final : public solver::Policy {
public:
    SafeBoPolicy(Index n_functions, SafeBoState state) : _n_functions(n_functions), _state(state) {}

    std::string name() const override { return "safe_bo"; }
    Vector beta_sqrt(long) const override { return Vector::Constant(_n_functions, _state.beta_sqrt); }
    Vector clip() const override;
    solver::Selection select(const solver::StepView& view) override;

private:
    Index _n_functions;
    SafeBoState _state;
};

} // namespace pdcbo::baselines
