#include <pdcbo/solver/pdcbo.hpp>

#include <pdcbo/gp/info_gain.hpp>

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

namespace pdcbo::solver {

std::string to_string(ScheduleMode mode)
{
    return mode == ScheduleMode::Theory ? "theory" : "practical";
}

ScheduleMode schedule_mode_from_string(const std::string& name)
{
    if (name == "theory")
        return ScheduleMode::Theory;
    if (name == "practical")
        return ScheduleMode::Practical;
    throw std::invalid_argument("unknown schedule mode '" + name + "' (expected theory or practical)");
}

Index primal_argmin(const Matrix& lower, const Vector& lambda, double eta, double* value)
{
    const Index nc = lower.rows() - 1;
    if (lower.cols() == 0)
        throw std::invalid_argument("primal_argmin: empty grid");
    if (lambda.size() != nc)
        throw std::invalid_argument("primal_argmin: dual vector length differs from constraint count");
    Index best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < lower.cols(); ++j) {
        const double v = lower(0, j) + eta * lambda.dot(lower.col(j).tail(nc));
        if (v < best_value) {
            best_value = v;
            best = j;
        }
    }
    if (value != nullptr)
        *value = best_value;
    return best;
}

StepSuggestion primal_update(const GridBounds& bounds, const DualState& dual, const Lattice& grid)
{
    if (bounds.size() != grid.size())
        throw std::invalid_argument("primal_update: bounds and grid sizes differ");
    StepSuggestion s;
    s.grid_index = primal_argmin(bounds.lower, dual.lambda, dual.eta, &s.primal_objective_value);
    s.theta = grid.point(s.grid_index);
    s.lcb_f = bounds.lower(0, s.grid_index);
    s.lcb_g = bounds.lower.col(s.grid_index).tail(bounds.n_functions() - 1);
    return s;
}

DualState dual_update(DualState dual, const Vector& lcb_g)
{
    if (lcb_g.size() != dual.lambda.size())
        throw std::invalid_argument("dual_update: constraint vector length differs from dual vector");
    dual.lambda = (dual.lambda + lcb_g).array() + dual.epsilon;
    dual.lambda = dual.lambda.cwiseMax(0.0);
    return dual;
}

double theory_lambda1(const ScheduleConfig& cfg, double eta)
{
    const double c2 = cfg.c.squaredNorm();
    return 4.0 * cfg.c0 / (eta * cfg.xi) + 4.0 * c2 / cfg.xi;
}

EpsilonResult theory_epsilon(const ScheduleConfig& cfg, const Vector& beta_tg, const Vector& gamma_tg)
{
    if (cfg.horizon < 1)
        throw std::invalid_argument("theory_epsilon: horizon must be >= 1");
    if (!(cfg.xi > 0.0) || !(cfg.c0 > 0.0))
        throw std::invalid_argument("theory_epsilon: xi and C_0 must be positive");
    const double horizon = static_cast<double>(cfg.horizon);
    const double n = static_cast<double>(cfg.c.size());
    EpsilonResult r;
    r.eta = 1.0 / std::sqrt(horizon);
    const double inner = theory_lambda1(cfg, r.eta);
    const double c2 = cfg.c.squaredNorm();
    const double first = std::sqrt(n * inner * inner + 4.0 * cfg.c0 / r.eta + 4.0 * c2);
    const double second = 8.0 * beta_tg.norm() * std::sqrt(horizon * gamma_tg.norm());
    r.epsilon = (first + second) / horizon;
    r.horizon_too_short = r.epsilon > cfg.xi / 2.0;
    return r;
}

namespace {
    std::string gamma_key(const gp::KernelSpecd& kernel, double noise_variance, const Box& box)
    {
        std::ostringstream key;
        key << std::hexfloat << gp::to_string(kernel.kind) << '|' << kernel.signal_variance << '|';
        for (Index i = 0; i < kernel.lengthscales.size(); ++i)
            key << kernel.lengthscales(i) << ',';
        key << '|' << noise_variance << '|';
        for (const auto& iv : box)
            key << iv.lo << ':' << iv.hi << ',';
        return key.str();
    }
} // namespace

std::shared_ptr<const std::vector<double>> gamma_sequence(const gp::KernelSpecd& kernel,
                                                          double noise_variance,
                                                          const Box& joint_box,
                                                          long budget)
{
    static std::mutex mutex;
    static std::map<std::string, std::shared_ptr<const std::vector<double>>> cache;

    const std::string key = gamma_key(kernel, noise_variance, joint_box);
    std::lock_guard lock(mutex);
    auto& slot = cache[key];
    if (!slot || static_cast<long>(slot->size()) < budget + 1) {
        const Matrix grid = halton_points(joint_box, kGammaGridSize);
        slot = std::make_shared<const std::vector<double>>(
            gp::info_gain_greedy_sequence(kernel, noise_variance, grid, budget));
    }
    return slot;
}

PdcboSchedule build_schedule(const ScheduleConfig& cfg,
                             const ModelSetup& setup,
                             const Box& joint_box,
                             long start_step,
                             long horizon,
                             long gamma_budget)
{
    if (horizon < 1 || start_step < 1)
        throw std::invalid_argument("build_schedule: horizon and start step must be >= 1");
    const Index nf = static_cast<Index>(setup.kernels.size());
    const Index nc = nf - 1;

    PdcboSchedule s;
    s.epoch.start_step = start_step;
    s.epoch.horizon = horizon;

    if (cfg.mode == ScheduleMode::Practical) {
        s.epoch.eta = cfg.practical_eta;
        s.epoch.epsilon = cfg.practical_epsilon;
        s.epoch.lambda1 = 0.0;
        s.epoch.dual_bound = 0.0;
        s.beta = gp::BetaSchedule::constant(cfg.practical_beta);
        s.clip = Vector::Constant(nf, std::numeric_limits<double>::infinity());
        s.initial.lambda = Vector::Zero(nc);
        s.initial.eta = s.epoch.eta;
        s.initial.epsilon = s.epoch.epsilon;
        return s;
    }

    if (cfg.c.size() != nc)
        throw std::invalid_argument("build_schedule: theory mode needs one RKHS bound per constraint");
    if (!(cfg.xi > 0.0))
        throw std::invalid_argument("build_schedule: theory mode needs a positive Slater margin xi");

    s.beta.mode = gp::BetaMode::Theory;
    s.beta.rkhs_bounds.assign(std::size_t(nf), 0.0);
    s.beta.rkhs_bounds[0] = cfg.c0;
    for (Index i = 0; i < nc; ++i)
        s.beta.rkhs_bounds[std::size_t(i + 1)] = cfg.c(i);
    s.beta.noise_sub_gaussian = cfg.noise_sub_gaussian;
    s.beta.delta = cfg.delta;
    s.beta.n_constraints = static_cast<int>(nc);
    s.clip = Eigen::Map<const Vector>(s.beta.rkhs_bounds.data(), nf);

    const long budget = std::max({gamma_budget, horizon, start_step});
    for (Index i = 0; i < nf; ++i)
        s.gamma.push_back(
            gamma_sequence(setup.kernels[std::size_t(i)].normalized(), setup.noise_variance(i), joint_box, budget));

    Vector beta_tg(nc), gamma_tg(nc);
    for (Index i = 0; i < nc; ++i) {
        const auto& g = *s.gamma[std::size_t(i + 1)];
        gamma_tg(i) = g[std::size_t(horizon)];
        beta_tg(i) = s.beta.beta_value(std::size_t(i + 1), horizon, g[std::size_t(horizon - 1)]);
    }
    ScheduleConfig at_horizon = cfg;
    at_horizon.horizon = horizon;
    const EpsilonResult eps = theory_epsilon(at_horizon, beta_tg, gamma_tg);
    s.epoch.eta = eps.eta;
    s.epoch.epsilon = eps.epsilon;
    s.epoch.horizon_too_short = eps.horizon_too_short;
    s.epoch.lambda1 = theory_lambda1(at_horizon, eps.eta);
    s.epoch.dual_bound = metrics::dual_bound_constant(nc, cfg.c0, cfg.c.norm(), cfg.xi, eps.eta);
    s.initial.lambda = Vector::Constant(nc, s.epoch.lambda1);
    s.initial.eta = eps.eta;
    s.initial.epsilon = eps.epsilon;
    s.initial.slater_xi = cfg.xi;
    if (eps.horizon_too_short) {
        std::ostringstream msg;
        msg << "epsilon " << eps.epsilon << " exceeds xi/2 = " << cfg.xi / 2.0 << " at horizon " << horizon;
        log_warning(msg.str());
    }
    return s;
}

PdcboPolicy::PdcboPolicy(PdcboSchedule schedule) : _schedule(std::move(schedule)), _dual(_schedule.initial) {}

Vector PdcboPolicy::beta_sqrt(long t) const
{
    const Index nf = _schedule.clip.size();
    Vector b(nf);
    for (Index i = 0; i < nf; ++i) {
        double gamma = 0.0;
        if (_schedule.beta.mode == gp::BetaMode::Theory) {
            const auto& g = *_schedule.gamma[std::size_t(i)];
            if (t - 1 >= static_cast<long>(g.size()))
                throw std::logic_error("PdcboPolicy: information-gain table shorter than the run");
            gamma = g[std::size_t(t - 1)];
        }
        b(i) = _schedule.beta.beta_value(std::size_t(i), t, gamma);
    }
    return b;
}

Selection PdcboPolicy::select(const StepView& view)
{
    Selection sel;
    sel.lambda = _dual.lambda;
    sel.grid_index = primal_argmin(view.bounds.lower, _dual.lambda, _dual.eta, &sel.primal_value);
    const Vector lcb_g = view.bounds.lower.col(sel.grid_index).tail(view.bounds.n_functions() - 1);
    _dual = dual_update(_dual, lcb_g);
    sel.lambda_next = _dual.lambda;
    return sel;
}

Box joint_box(const problems::ProblemInstance& problem)
{
    Box b = problem.theta_box();
    b.insert(b.end(), problem.z_box().begin(), problem.z_box().end());
    return b;
}

namespace {
    using Clock = std::chrono::steady_clock;

    double seconds_since(Clock::time_point start)
    {
        return std::chrono::duration<double>(Clock::now() - start).count();
    }

    void record_schedule(TraceMetadata& meta, const ScheduleConfig& cfg)
    {
        meta.schedule_mode = to_string(cfg.mode);
        if (cfg.mode == ScheduleMode::Theory) {
            meta.values["xi"] = cfg.xi;
            meta.values["c0"] = cfg.c0;
            meta.values["c_norm"] = cfg.c.norm();
        }
    }
} // namespace

ExperimentTrace run_policy(problems::ProblemPtr problem, Policy& policy, const ModelSetup& setup, std::uint64_t seed, long T)
{
    if (T < 1)
        throw std::invalid_argument("run: horizon must be >= 1");
    const auto start = Clock::now();
    ExperimentTrace trace;
    trace.meta.algorithm = policy.name();
    describe_problem(trace.meta, *problem, seed);
    ExperimentRunner runner(problem, setup.grid, setup.kernels, setup.noise_variance, setup.output_scale, seed);
    runner.run(policy, T, trace);
    trace.meta.wall_time_s = seconds_since(start);
    return trace;
}

ExperimentTrace run_pdcbo(problems::ProblemPtr problem, ScheduleConfig cfg, const ModelSetup& setup, std::uint64_t seed, long T)
{
    if (T < 1)
        throw std::invalid_argument("run_pdcbo: horizon must be >= 1");
    cfg.horizon = T;
    const auto start = Clock::now();
    PdcboPolicy policy(build_schedule(cfg, setup, joint_box(*problem), 1, T, T));
    ExperimentTrace trace;
    trace.meta.algorithm = policy.name();
    describe_problem(trace.meta, *problem, seed);
    record_schedule(trace.meta, cfg);
    ExperimentRunner runner(problem, setup.grid, setup.kernels, setup.noise_variance, setup.output_scale, seed);
    runner.run(policy, T, trace);
    EpochInfo epoch = policy.schedule().epoch;
    epoch.length = T;
    trace.meta.epochs.push_back(epoch);
    trace.meta.wall_time_s = seconds_since(start);
    return trace;
}

std::vector<long> doubling_epochs(long initial, long total_steps)
{
    if (initial < 1 || total_steps < 0)
        throw std::invalid_argument("doubling_epochs: initial epoch must be >= 1");
    std::vector<long> out;
    long length = initial;
    for (long used = 0; used < total_steps; length *= 2) {
        out.push_back(std::min(length, total_steps - used));
        used += out.back();
    }
    return out;
}

ExperimentTrace run_with_doubling(problems::ProblemPtr problem,
                                  ScheduleConfig cfg,
                                  const ModelSetup& setup,
                                  std::uint64_t seed,
                                  long total_steps)
{
    if (cfg.mode != ScheduleMode::Theory)
        throw std::invalid_argument("run_with_doubling: the doubling trick applies to theory-mode schedules");
    if (total_steps < 1)
        throw std::invalid_argument("run_with_doubling: total_steps must be >= 1");
    const auto start = Clock::now();
    const Box jb = joint_box(*problem);
    const std::vector<long> lengths = doubling_epochs(cfg.initial_epoch, total_steps);
    const long last_horizon = cfg.initial_epoch << (lengths.size() - 1);

    ExperimentTrace trace;
    trace.meta.algorithm = "pdcbo";
    describe_problem(trace.meta, *problem, seed);
    record_schedule(trace.meta, cfg);
    ExperimentRunner runner(problem, setup.grid, setup.kernels, setup.noise_variance, setup.output_scale, seed);

    long horizon = cfg.initial_epoch;
    for (long length : lengths) {
        const long first = runner.steps_done() + 1;
        PdcboPolicy policy(build_schedule(cfg, setup, jb, first, horizon, std::max(total_steps, last_horizon)));
        runner.run(policy, length, trace);
        EpochInfo epoch = policy.schedule().epoch;
        epoch.length = length;
        trace.meta.epochs.push_back(epoch);
        horizon *= 2;
    }
    trace.meta.wall_time_s = seconds_since(start);
    return trace;
}

} // namespace pdcbo::solver
