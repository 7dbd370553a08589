#pragma once

#include <pdcbo/lattice.hpp>
#include <pdcbo/problems/problem.hpp>

#include <Eigen/Core>

#include <array>
#include <optional>
#include <unordered_map>

namespace pdcbo::problems {

/**
 * Williams-Otto CSTR with three Arrhenius reactions
 *
 *   A + B -> C,    B + C -> P + E,    C + P -> G
 *
 * at steady state. Defaults follow the usual literature parameterisation:
 * holdup 2105 kg, feed of A 1.8275 kg/s, k_i = a_i exp(-b_i / (T_r + 273.15)).
 */
struct WilliamsOttoConstants {
    double holdup = 2105.0;
    double feed_a = 1.8275;
    std::array<double, 3> pre_exponential = {1.6599e6, 7.2117e8, 2.6745e12};
    std::array<double, 3> activation = {6666.7, 8333.3, 11111.0};
};

/// Mass fractions ordered (X_A, X_B, X_C, X_P, X_E, X_G).
using MassFractions = Eigen::Matrix<double, 6, 1>;

enum Species : int { A = 0, B = 1, C = 2, P = 3, E = 4, G = 5 };

struct SteadyState {
    MassFractions x;
    double residual = 0.0; ///< max-abs mass-balance residual (kg/s)
    int iterations = 0;
};

inline constexpr double kSteadyStateTolerance = 1e-10;
inline constexpr int kSteadyStateMaxIterations = 200;

/// Steady-state mass balances (kg/s); all zero at a steady state.
MassFractions cstr_balance_residual(const MassFractions& x,
                                    double feed_b,
                                    double temperature,
                                    const WilliamsOttoConstants& constants = {});

/**
 * Solves the six balances by damped Newton iteration with pseudo-transient
 * regularisation, starting from the feed composition.
 * Throws SolverError on non-convergence and ModelDomainError on negative fractions.
 */
SteadyState cstr_steady_state(double feed_b, double temperature, const WilliamsOttoConstants& constants = {});

/// Prices ordered (product P, byproduct E, raw A, raw B).
double wo_objective(const SteadyState& state, double feed_b, const Vector& prices, const WilliamsOttoConstants& constants = {});
double wo_objective(double feed_b, double temperature, const Vector& prices, const WilliamsOttoConstants& constants = {});

/// Literature price vector; with it the unconstrained profit optimum violates the X_G limit.
Vector williams_otto_nominal_prices();

inline constexpr double kXaThreshold = 0.12;
inline constexpr double kXgThreshold = 0.08;

/**
 * theta = (F_B, T_r) in [4, 7] x [70, 100], z = price vector drawn around the
 * nominal prices, f = J(F_B, T_r, P), g_1 = X_A - 0.12, g_2 = X_G - 0.08.
 *
 * Steady states on an optional precompute lattice are solved once at construction
 * and served read-only afterwards; other points are solved on demand.
 */
class WilliamsOttoInstance final : public ProblemInstance {
public:
    WilliamsOttoInstance(Vector nominal_prices,
                         double alpha,
                         double noise_sigma,
                         WilliamsOttoConstants constants = {},
                         const Lattice* precompute = nullptr);

    std::string name() const override { return "williams_otto"; }
    TrueValues evaluate(const Vector& theta, const Vector& z) const override;
    std::optional<Vector> declared_safe_seed() const override { return _safe_seed; }

    SteadyState steady_state(const Vector& theta) const;
    const WilliamsOttoConstants& constants() const { return _constants; }
    const Vector& nominal_prices() const { return _nominal; }
    double alpha() const { return _alpha; }

    static Box parameter_box() { return {{4.0, 7.0}, {70.0, 100.0}}; }

private:
    struct KeyHash {
        std::size_t operator()(const std::pair<double, double>& k) const;
    };

    WilliamsOttoConstants _constants;
    Vector _nominal;
    double _alpha;
    Vector _safe_seed;
    std::unordered_map<std::pair<double, double>, SteadyState, KeyHash> _cache;
};

} // namespace pdcbo::problems
