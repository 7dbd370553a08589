#pragma once

#include <pdcbo/gp/bounds.hpp>
#include <pdcbo/solver/runner.hpp>

#include <memory>
#include <vector>

namespace pdcbo::solver {

enum class ScheduleMode { Theory, Practical };

std::string to_string(ScheduleMode mode);
ScheduleMode schedule_mode_from_string(const std::string& name);

/// Scaled dual vector lambda_t with the constants of the current epoch.
struct DualState {
    Vector lambda;
    double eta = 1.0;
    double epsilon = 0.0;
    double slater_xi = 0.0; ///< theory mode only
};

struct ScheduleConfig {
    ScheduleMode mode = ScheduleMode::Practical;
    long horizon = 1;
    /// RKHS bounds: C_0 for the objective and C_i per constraint (theory mode; also the clip levels).
    double c0 = 1.0;
    Vector c;
    double xi = 1.0;
    double practical_epsilon = 0.0;
    double practical_eta = 1.0;
    double practical_beta = 1.0;
    double noise_sub_gaussian = 0.05;
    double delta = 0.05;
    bool doubling = false;
    long initial_epoch = 1; ///< T_0 for the doubling trick
};

/// Result of the primal step at one context.
struct StepSuggestion {
    Index grid_index = 0;
    Vector theta;
    double primal_objective_value = 0.0;
    double lcb_f = 0.0;
    Vector lcb_g;
};

/// argmin_j l^f_j + eta lambda^T l^g_j over the columns of lower ((N + 1) x m); ties to the lowest j.
Index primal_argmin(const Matrix& lower, const Vector& lambda, double eta, double* value = nullptr);

StepSuggestion primal_update(const GridBounds& bounds, const DualState& dual, const Lattice& grid);

/// lambda <- [lambda + l^g + epsilon]^+ ; eta and epsilon unchanged.
DualState dual_update(DualState dual, const Vector& lcb_g);

struct EpsilonResult {
    double epsilon = 0.0;
    double eta = 0.0;
    bool horizon_too_short = false; ///< epsilon > xi / 2
};

/// Theory-mode epsilon for cfg.horizon with eta = 1/sqrt(T); beta_tg and gamma_tg run over the constraints.
EpsilonResult theory_epsilon(const ScheduleConfig& cfg, const Vector& beta_tg, const Vector& gamma_tg);

/// 4 C_0/(eta xi) + 4 |C|^2/xi, the per-component initial dual value in theory mode.
double theory_lambda1(const ScheduleConfig& cfg, double eta);

inline constexpr Index kGammaGridSize = 256;

/**
 * Greedy information-gain sequence gamma_0..gamma_budget on the first kGammaGridSize
 * Halton points of joint_box. Results are cached per (kernel, noise, box) and shared
 * between threads.
 */
std::shared_ptr<const std::vector<double>> gamma_sequence(const gp::KernelSpecd& kernel,
                                                          double noise_variance,
                                                          const Box& joint_box,
                                                          long budget);

/**
 * Kernels, GP noise variances, output scales and candidate grid of one experiment
 * (objective first). Kernels and noise variances are in model units (see SurrogateModels).
 */
struct ModelSetup {
    std::vector<gp::KernelSpecd> kernels;
    Vector noise_variance;
    Vector output_scale;
    Lattice grid;

    /// Same noise variance for every function, unit output scales.
    static ModelSetup shared_noise(std::vector<gp::KernelSpecd> kernels, double noise_variance, Lattice grid)
    {
        const Index n = static_cast<Index>(kernels.size());
        return {std::move(kernels), Vector::Constant(n, noise_variance), Vector::Ones(n), std::move(grid)};
    }
};

/// Constants of one PDCBO segment plus the per-step beta inputs.
struct PdcboSchedule {
    EpochInfo epoch;
    DualState initial;
    gp::BetaSchedule beta;
    Vector clip;
    std::vector<std::shared_ptr<const std::vector<double>>> gamma; ///< theory mode, per function
};

/**
 * Builds the schedule of a segment starting at global step start_step with horizon
 * guess `horizon`. Theory mode needs `gamma_budget` >= the last global step reached.
 */
PdcboSchedule build_schedule(const ScheduleConfig& cfg,
                             const ModelSetup& setup,
                             const Box& joint_box,
                             long start_step,
                             long horizon,
                             long gamma_budget);

class PdcboPolicy final : public Policy {
public:
    explicit PdcboPolicy(PdcboSchedule schedule);

    std::string name() const override { return "pdcbo"; }
    Vector beta_sqrt(long t) const override;
    Vector clip() const override { return _schedule.clip; }
    Selection select(const StepView& view) override;

    const DualState& dual() const { return _dual; }
    const PdcboSchedule& schedule() const { return _schedule; }

private:
    PdcboSchedule _schedule;
    DualState _dual;
};

/// Joint (theta, z) box of a problem.
Box joint_box(const problems::ProblemInstance& problem);

/// Runs any policy for T steps from an empty model.
ExperimentTrace run_policy(problems::ProblemPtr problem, Policy& policy, const ModelSetup& setup, std::uint64_t seed, long T);

/// PDCBO for T steps with one schedule for horizon T (cfg.horizon is overridden by T).
ExperimentTrace run_pdcbo(problems::ProblemPtr problem, ScheduleConfig cfg, const ModelSetup& setup, std::uint64_t seed, long T);

/**
 * PDCBO over epochs of length T_0, 2 T_0, 4 T_0, ... until total_steps are used. Each
 * epoch restarts the dual state with its own constants; GP data is kept. Requires theory mode.
 */
ExperimentTrace run_with_doubling(problems::ProblemPtr problem,
                                  ScheduleConfig cfg,
                                  const ModelSetup& setup,
                                  std::uint64_t seed,
                                  long total_steps);

/// Epoch lengths for the doubling trick (the last one truncated to fit).
std::vector<long> doubling_epochs(long initial, long total_steps);

} // namespace pdcbo::solver
