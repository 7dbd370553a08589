#pragma once

#include <pdcbo/gp/kernel.hpp>
#include <pdcbo/gp/posterior.hpp>
#include <pdcbo/lattice.hpp>
#include <pdcbo/metrics/metrics.hpp>
#include <pdcbo/problems/problem.hpp>
#include <pdcbo/trace.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pdcbo::solver {

/// Posterior summaries over a candidate grid; each matrix is (N + 1) x m, objective in row 0.
struct GridBounds {
    Matrix mean;
    Matrix sigma;
    Matrix lower;
    Matrix upper;

    Index n_functions() const { return mean.rows(); }
    Index size() const { return mean.cols(); }
};

/**
 * One GP per function (objective first) over the joint input (theta, z).
 * Function i is modelled in units of output_scale(i): observations are divided by it
 * before conditioning and every bound is reported in those model units.
 */
class SurrogateModels {
public:
    SurrogateModels(std::vector<gp::KernelSpecd> kernels, const Vector& noise_variances, const Vector& output_scale);

    Index n_functions() const { return static_cast<Index>(_models.size()); }
    long size() const { return static_cast<long>(_models.front().size()); }
    const gp::GpPosteriord& model(Index i) const { return _models[std::size_t(i)]; }
    const Vector& output_scale() const { return _scale; }

    /// Appends one joint input with one raw observation per function.
    void condition(const Vector& x, const Vector& y);

    /// Bounds at (theta_j, z) for every column theta_j; beta_sqrt and clip hold one value per function.
    GridBounds bounds(const Vector& z, const Matrix& thetas, const Vector& beta_sqrt, const Vector& clip) const;

private:
    std::vector<gp::GpPosteriord> _models;
    Vector _scale;
};

/// Everything a policy may look at when choosing theta_t.
struct StepView {
    long t = 0;
    const Vector& z;
    const Lattice& grid;
    const GridBounds& bounds;
    const SurrogateModels& models;
};

struct Selection {
    Index grid_index = 0;
    double primal_value = 0.0;
    Vector lambda;      ///< dual state used for the choice (zeros for baselines)
    Vector lambda_next; ///< dual state after the step
};

/// Step rule shared by PDCBO and the baselines.
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    /// Confidence multipliers for step t, one per function.
    virtual Vector beta_sqrt(long t) const = 0;
    /// Clip levels C_i, one per function (+inf for none).
    virtual Vector clip() const = 0;
    virtual Selection select(const StepView& view) = 0;
    /// Called after the observation at the selected point was added to the models.
    virtual void observe(const StepView&, const Selection&, const Vector& /*y*/) {}
};

/**
 * Drives a policy against a problem: contexts, noisy queries, conditioning, regret
 * bookkeeping and trace rows. State (models, context stream, accumulators) persists
 * across calls to run(), so consecutive calls continue one experiment.
 *
 * Randomness: contexts come from derive_seed(seed, Context) and the noise of
 * function i at step t from derive_seed(seed, Noise, {i, t}); neither depends on the
 * policy, so algorithms run on one seed see the same contexts and noise.
 */
class ExperimentRunner {
public:
    ExperimentRunner(problems::ProblemPtr problem,
                     Lattice grid,
                     std::vector<gp::KernelSpecd> kernels,
                     const Vector& noise_variances,
                     const Vector& output_scale,
                     std::uint64_t seed);

    /// Executes `steps` further steps, appending rows to trace.
    void run(Policy& policy, long steps, ExperimentTrace& trace);

    const problems::ProblemInstance& problem() const { return *_problem; }
    const Lattice& grid() const { return _grid; }
    const SurrogateModels& models() const { return _models; }
    const metrics::MetricsAccumulator& metrics() const { return _metrics; }
    long steps_done() const { return _t; }

private:
    problems::ProblemPtr _problem;
    Lattice _grid;
    SurrogateModels _models;
    std::uint64_t _seed;
    problems::ContextSequence _contexts;
    metrics::MetricsAccumulator _metrics;
    long _t = 0;
};

/// Draw for observation noise of function fn at step t.
double noise_draw(std::uint64_t seed, Index fn, long t, double sigma);

/// Fills the trace metadata fields that describe the problem and seed.
void describe_problem(TraceMetadata& meta, const problems::ProblemInstance& problem, std::uint64_t seed);

} // namespace pdcbo::solver
