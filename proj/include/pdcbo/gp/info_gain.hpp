#pragma once

#include <pdcbo/gp/kernel.hpp>

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pdcbo::gp {

/**
 * Greedy estimate of the maximum information gain over a finite candidate grid.
 *
 * Repeatedly picks the candidate (repeats allowed) with the largest marginal gain
 * 1/2 log(1 + sigma^2(x) / noise_variance) and conditions on it. Element k of the
 * result is the gain accumulated after k picks, k = 0..budget. By submodularity the
 * final value is within a factor (1 - 1/e) of the best subset of the grid.
 */
template <typename Scalar, typename D>
std::vector<Scalar> info_gain_greedy_sequence(const KernelSpec<Scalar>& spec,
                                              Scalar noise_variance,
                                              const Eigen::MatrixBase<D>& candidate_grid,
                                              long budget)
{
    using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    if (candidate_grid.cols() == 0)
        throw std::invalid_argument("info_gain_greedy: candidate grid is empty");
    if (!(noise_variance > Scalar(0)))
        throw std::invalid_argument("info_gain_greedy: noise variance must be positive");
    if (budget < 0)
        throw std::invalid_argument("info_gain_greedy: budget must be non-negative");

    std::vector<Scalar> gains(static_cast<std::size_t>(budget) + 1, Scalar(0));
    if (budget == 0)
        return gains;

    // Posterior covariance over the grid, downdated in place after each pick.
    MatrixType cov = kernel_matrix(spec, candidate_grid, candidate_grid);
    Scalar total = Scalar(0);
    for (long k = 1; k <= budget; ++k) {
        Eigen::Index best = 0;
        const VectorType var = cov.diagonal().cwiseMax(Scalar(0));
        var.maxCoeff(&best);
        total += Scalar(0.5) * std::log1p(var(best) / noise_variance);
        gains[static_cast<std::size_t>(k)] = total;

        const VectorType c = cov.col(best);
        cov.noalias() -= (c * c.transpose()) / (var(best) + noise_variance);
    }
    return gains;
}

template <typename Scalar, typename D>
Scalar info_gain_greedy(const KernelSpec<Scalar>& spec,
                        Scalar noise_variance,
                        const Eigen::MatrixBase<D>& candidate_grid,
                        long budget)
{
    return info_gain_greedy_sequence(spec, noise_variance, candidate_grid, budget).back();
}

} // namespace pdcbo::gp
