#pragma once

#include <pdcbo/gp/posterior.hpp>
#include <pdcbo/lattice.hpp>
#include <pdcbo/problems/problem.hpp>

#include <cstdint>
#include <memory>
#include <vector>

namespace pdcbo::problems {

/// Near-noiseless interpolation variance used to turn anchor samples into functions.
inline constexpr double kAnchorInterpolationNoise = 1e-10;

/**
 * Objective and constraints drawn jointly from a zero-mean GP prior on an anchor
 * lattice over theta_box x z_box, then extended off-lattice by the GP posterior
 * mean through the anchors. Each function is therefore a finite kernel expansion
 * sum_j a_j k(x_j, .) and is identical everywhere for a given seed.
 */
class GpSampledInstance final : public ProblemInstance {
public:
    GpSampledInstance(gp::KernelSpecd kernel,
                      Box theta_box,
                      Box z_box,
                      Index n_constraints,
                      std::uint64_t seed,
                      std::vector<Index> grid_resolution,
                      double noise_sigma);

    std::string name() const override { return "gp_sampled"; }
    TrueValues evaluate(const Vector& theta, const Vector& z) const override;
    std::vector<TrueValues> evaluate_grid(const Matrix& thetas, const Vector& z) const override;

    const gp::KernelSpecd& kernel() const { return _kernel; }
    const Lattice& anchor_grid() const { return _anchors; }
    /// (N + 1) x m matrix of sampled values, row 0 the objective.
    const Matrix& anchor_values() const { return _anchor_values; }
    std::uint64_t seed() const { return _seed; }

    /// RKHS norm of function fn under the sampling kernel: sqrt(a^T K a).
    double rkhs_norm(Index fn) const;

private:
    gp::KernelSpecd _kernel;
    std::uint64_t _seed;
    Lattice _anchors;
    Matrix _anchor_values;
    std::vector<gp::GpPosteriord> _interpolants;
};

std::shared_ptr<GpSampledInstance> sample_gp_instance(const gp::KernelSpecd& kernel,
                                                      const Box& theta_box,
                                                      const Box& z_box,
                                                      Index n_constraints,
                                                      std::uint64_t seed,
                                                      const std::vector<Index>& grid_resolution,
                                                      double noise_sigma = 0.05);

} // namespace pdcbo::problems
