#pragma once

#include <pdcbo/log.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace pdcbo::gp {

template <typename Scalar>
struct ConfidenceInterval {
    Scalar lower;
    Scalar upper;
};

/**
 * Clipped confidence interval [max(mu - b*sigma, -C), min(mu + b*sigma, C)].
 * If clipping crosses the bounds (|mu| far beyond C) the degenerate interval
 * (-C, C) is returned and a warning is logged.
 */
template <typename Scalar>
ConfidenceInterval<Scalar> confidence_bounds(Scalar mu, Scalar sigma, Scalar beta_sqrt, Scalar clip)
{
    if (!(beta_sqrt > Scalar(0)))
        throw std::invalid_argument("confidence_bounds: beta_sqrt must be positive");
    if (!(clip > Scalar(0)))
        throw std::invalid_argument("confidence_bounds: clip must be positive");
    using std::max;
    using std::min;
    const Scalar lower = max(mu - beta_sqrt * sigma, -clip);
    const Scalar upper = min(mu + beta_sqrt * sigma, clip);
    if (lower > upper) {
        std::ostringstream msg;
        msg << "confidence bounds crossed after clipping (mu=" << mu << ", sigma=" << sigma << ", C=" << clip
            << "); returning (-C, C)";
        log_warning(msg.str());
        return {-clip, clip};
    }
    return {lower, upper};
}

enum class BetaMode { Theory, Constant };

/**
 * Schedule for the confidence multiplier beta^{1/2}_{i,t}.
 *
 * Theory mode: C_i + sigma * sqrt(2 (gamma_{i,t-1} + 1 + ln((N + 1) / delta))).
 * Constant mode: constant_value for every function and step.
 */
struct BetaSchedule {
    BetaMode mode = BetaMode::Constant;
    double constant_value = 1.0;
    std::vector<double> rkhs_bounds; ///< C_0 (objective), C_1..C_N
    double noise_sub_gaussian = 0.05;
    double delta = 0.05;
    int n_constraints = 1;

    static BetaSchedule constant(double value)
    {
        BetaSchedule s;
        s.constant_value = value;
        return s;
    }

    /// gamma_estimate stands for gamma_{i,t-1}.
    double beta_value(std::size_t fn_index, long t, double gamma_estimate) const
    {
        if (t < 1)
            throw std::invalid_argument("beta_value: step must be >= 1");
        if (mode == BetaMode::Constant) {
            if (!(constant_value > 0.0))
                throw std::invalid_argument("beta_value: constant must be positive");
            return constant_value;
        }
        if (!(delta > 0.0 && delta < 1.0))
            throw std::invalid_argument("beta_value: delta must lie in (0, 1)");
        if (gamma_estimate < 0.0)
            throw std::invalid_argument("beta_value: gamma estimate must be non-negative");
        if (fn_index >= rkhs_bounds.size())
            throw std::invalid_argument("beta_value: no RKHS bound for function index");
        const double log_term = std::log(static_cast<double>(n_constraints + 1) / delta);
        return rkhs_bounds[fn_index] + noise_sub_gaussian * std::sqrt(2.0 * (gamma_estimate + 1.0 + log_term));
    }
};

} // namespace pdcbo::gp
