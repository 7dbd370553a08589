#include <pdcbo/solver/runner.hpp>

#include <pdcbo/gp/bounds.hpp>

#include <cmath>
#include <random>
#include <sstream>

namespace pdcbo::solver {

SurrogateModels::SurrogateModels(std::vector<gp::KernelSpecd> kernels,
                                 const Vector& noise_variances,
                                 const Vector& output_scale)
    : _scale(output_scale)
{
    if (kernels.empty())
        throw std::invalid_argument("SurrogateModels: need at least the objective kernel");
    if (noise_variances.size() != static_cast<Index>(kernels.size()))
        throw std::invalid_argument("SurrogateModels: need one noise variance per kernel");
    if (_scale.size() != noise_variances.size() || !(_scale.array() > 0.0).all())
        throw std::invalid_argument("SurrogateModels: need one positive output scale per kernel");
    for (const auto& k : kernels)
        if (k.dim() != kernels.front().dim())
            throw std::invalid_argument("SurrogateModels: kernels disagree on input dimension");
    for (std::size_t i = 0; i < kernels.size(); ++i)
        _models.emplace_back(std::move(kernels[i]), noise_variances(Index(i)));
}

void SurrogateModels::condition(const Vector& x, const Vector& y)
{
    if (y.size() != n_functions())
        throw std::invalid_argument("SurrogateModels::condition: one observation per function required");
    for (Index i = 0; i < n_functions(); ++i)
        _models[std::size_t(i)].add_observation(x, y(i) / _scale(i));
}

GridBounds SurrogateModels::bounds(const Vector& z, const Matrix& thetas, const Vector& beta_sqrt, const Vector& clip) const
{
    const Index nf = n_functions();
    if (beta_sqrt.size() != nf || clip.size() != nf)
        throw std::invalid_argument("SurrogateModels::bounds: beta and clip need one entry per function");
    const Index m = thetas.cols();
    Matrix joint(thetas.rows() + z.size(), m);
    joint.topRows(thetas.rows()) = thetas;
    joint.bottomRows(z.size()) = z.replicate(1, m);

    GridBounds b;
    b.mean.resize(nf, m);
    b.sigma.resize(nf, m);
    b.lower.resize(nf, m);
    b.upper.resize(nf, m);
    Vector mean, var;
    for (Index i = 0; i < nf; ++i) {
        _models[std::size_t(i)].predict(joint, mean, var);
        b.mean.row(i) = mean.transpose();
        b.sigma.row(i) = var.cwiseSqrt().transpose();
        for (Index j = 0; j < m; ++j) {
            const auto ci = gp::confidence_bounds(b.mean(i, j), b.sigma(i, j), beta_sqrt(i), clip(i));
            b.lower(i, j) = ci.lower;
            b.upper(i, j) = ci.upper;
        }
    }
    return b;
}

double noise_draw(std::uint64_t seed, Index fn, long t, double sigma)
{
    if (sigma == 0.0)
        return 0.0;
    Rng rng(derive_seed(seed, Stream::Noise, {std::uint64_t(fn), std::uint64_t(t)}));
    return std::normal_distribution<double>(0.0, sigma)(rng);
}

void describe_problem(TraceMetadata& meta, const problems::ProblemInstance& problem, std::uint64_t seed)
{
    meta.problem = problem.name();
    meta.seed = seed;
    meta.n_theta = problem.n_theta();
    meta.n_z = problem.n_z();
    meta.n_constraints = problem.n_constraints();
}

ExperimentRunner::ExperimentRunner(problems::ProblemPtr problem,
                                   Lattice grid,
                                   std::vector<gp::KernelSpecd> kernels,
                                   const Vector& noise_variances,
                                   const Vector& output_scale,
                                   std::uint64_t seed)
    : _problem(std::move(problem)),
      _grid(std::move(grid)),
      _models(std::move(kernels), noise_variances, output_scale),
      _seed(seed),
      _contexts(_problem->contexts(derive_seed(seed, Stream::Context))),
      _metrics(_problem->n_constraints())
{
    if (_grid.dim() != _problem->n_theta())
        throw std::invalid_argument("ExperimentRunner: grid dimension differs from the parameter dimension");
    if (_models.n_functions() != _problem->n_constraints() + 1)
        throw std::invalid_argument("ExperimentRunner: need one kernel per function");
    if (_models.model(0).dim() != _problem->n_theta() + _problem->n_z())
        throw std::invalid_argument("ExperimentRunner: kernel dimension must be n_theta + n_z");
}

void ExperimentRunner::run(Policy& policy, long steps, ExperimentTrace& trace)
{
    const Index nc = _problem->n_constraints();
    const double noise = _problem->noise_sigma();
    for (long k = 0; k < steps; ++k) {
        const long t = ++_t;
        try {
            const Vector z = _contexts.next();
            const GridBounds bounds = _models.bounds(z, _grid.points(), policy.beta_sqrt(t), policy.clip());
            const StepView view{t, z, _grid, bounds, _models};
            const Selection sel = policy.select(view);
            if (sel.grid_index < 0 || sel.grid_index >= _grid.size())
                throw std::logic_error(policy.name() + " selected an index outside the grid");

            const auto values = _problem->evaluate_grid(_grid.points(), z);
            const auto oracle = metrics::oracle_from_values(values, _grid);
            const auto& truth = values[std::size_t(sel.grid_index)];

            TraceRow row;
            row.t = t;
            row.grid_index = sel.grid_index;
            row.z = z;
            row.theta = _grid.point(sel.grid_index);
            row.y.resize(nc + 1);
            row.y(0) = truth.f + noise_draw(_seed, 0, t, noise);
            for (Index i = 0; i < nc; ++i)
                row.y(i + 1) = truth.g(i) + noise_draw(_seed, i + 1, t, noise);
            row.f_true = truth.f;
            row.g_true = truth.g;
            row.f_star = oracle.f_star;
            metrics::update_metrics(_metrics, truth.f, oracle.f_star, truth.g);
            row.regret = _metrics.regret_history.back();
            row.regret_cum = _metrics.regret_cum;
            row.g_cum = _metrics.violation_cum;
            row.lambda = sel.lambda.size() == nc ? sel.lambda : Vector(Vector::Zero(nc));
            row.lambda_next = sel.lambda_next.size() == nc ? sel.lambda_next : Vector(Vector::Zero(nc));
            row.lcb_f = bounds.lower(0, sel.grid_index);
            row.lcb_g = bounds.lower.col(sel.grid_index).tail(nc);
            row.sigma = bounds.sigma.col(sel.grid_index);
            row.primal_value = sel.primal_value;

            _models.condition(join_input(row.theta, z), row.y);
            policy.observe(view, sel, row.y);
            trace.rows.push_back(std::move(row));
        } catch (const NumericError& e) {
            std::ostringstream msg;
            msg << "step " << t << ": " << e.what();
            throw NumericError(msg.str(), e.attempted_jitter());
        }
    }
}

} // namespace pdcbo::solver
