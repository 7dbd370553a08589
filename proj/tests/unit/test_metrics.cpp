#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <pdcbo/log.hpp>
#include <pdcbo/metrics/metrics.hpp>
#include <pdcbo/problems/gp_sampled.hpp>
#include <pdcbo/solver/pdcbo.hpp>

#include <cmath>

using namespace pdcbo;
using namespace pdcbo::metrics;

namespace {
Vector one(double v) { return Vector::Constant(1, v); }

std::shared_ptr<problems::FunctionProblem> shifted_smoke(double shift)
{
    auto ctx = std::make_shared<problems::UniformContextGenerator>(Box{{0.0, 0.0}});
    return std::make_shared<problems::FunctionProblem>(
        "shifted", Box{{-1.0, 1.0}}, ctx, [shift](const Vector& th, const Vector&) { return (th(0) - 0.3) * (th(0) - 0.3) + shift; },
        std::vector<problems::FunctionProblem::Oracle>{[](const Vector& th, const Vector&) { return th(0) - 0.5; }}, 0.0);
}
} // namespace

TEST_CASE("oracle on the smoke problem")
{
    auto p = problems::make_smoke_problem();
    const auto s = oracle_optimum(*p, one(0.0), Lattice({{-1.0, 1.0}}, {21}));
    CHECK(s.theta_star(0) == doctest::Approx(0.0).scale(1.0));
    CHECK(s.f_star == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("oracle with a feasible unconstrained minimiser")
{
    auto p = shifted_smoke(0.0);
    const auto s = oracle_optimum(*p, one(0.0), Lattice({{-1.0, 1.0}}, {21}));
    CHECK(s.theta_star(0) == doctest::Approx(0.3));
}

TEST_CASE("oracle is invariant to shifting the objective")
{
    const Lattice grid({{-1.0, 1.0}}, {41});
    const auto a = oracle_optimum(*shifted_smoke(0.0), one(0.0), grid);
    const auto b = oracle_optimum(*shifted_smoke(7.5), one(0.0), grid);
    CHECK(a.index == b.index);
    CHECK(b.f_star == doctest::Approx(a.f_star + 7.5));
}

TEST_CASE("oracle reports infeasible contexts")
{
    auto ctx = std::make_shared<problems::UniformContextGenerator>(Box{{0.0, 0.0}});
    problems::FunctionProblem p("infeasible", {{-1.0, 1.0}}, ctx, [](const Vector&, const Vector&) { return 0.0; },
                                {[](const Vector&, const Vector&) { return 1.0; }}, 0.0);
    CHECK_THROWS_AS(oracle_optimum(p, one(0.0), Lattice({{-1.0, 1.0}}, {5})), InfeasibleContextError);
}

TEST_CASE("oracle agrees with a refined lattice search")
{
    const auto k = gp::KernelSpecd::squared_exponential(2.0, Eigen::Vector2d(1.0, 1.0));
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        const auto inst = problems::sample_gp_instance(k, {{-10, 10}}, {{-10, 10}}, 1, seed, {21, 21});
        const Lattice grid({{-10, 10}}, {101});
        const Lattice fine = grid.refined();
        const Vector z = one(-3.7 + double(seed));
        try {
            const auto coarse = oracle_optimum(*inst, z, grid);
            const auto refined = oracle_optimum(*inst, z, fine);
            // largest change of f between neighbouring coarse nodes
            double cell_variation = 0.0;
            const auto vals = inst->evaluate_grid(grid.points(), z);
            for (std::size_t j = 1; j < vals.size(); ++j)
                cell_variation = std::max(cell_variation, std::abs(vals[j].f - vals[j - 1].f));
            CHECK(refined.f_star <= coarse.f_star + 1e-12);
            CHECK(coarse.f_star - refined.f_star <= cell_variation);
        } catch (const InfeasibleContextError&) {
            CHECK_THROWS_AS(oracle_optimum(*inst, z, fine), InfeasibleContextError);
        }
    }
}

TEST_CASE("metrics accumulation")
{
    MetricsAccumulator acc(1);
    update_metrics(acc, 1.0, 1.0, one(1.0));
    update_metrics(acc, 2.0, 2.0, one(-1.0));
    CHECK(acc.regret_cum == 0.0);
    CHECK(acc.violation() == 0.0);

    MetricsAccumulator b(1);
    for (double g : {1.0, 1.0, -0.5})
        update_metrics(b, 0.5, 0.0, one(g));
    CHECK(b.violation() == doctest::Approx(1.5));
    CHECK(b.regret_cum == doctest::Approx(1.5));
    CHECK(b.steps() == 3);

    MetricsAccumulator c(2);
    Vector g(2);
    g << 3.0, -2.0;
    update_metrics(c, 0.0, 0.0, g);
    g << 1.0, 0.5;
    update_metrics(c, 0.0, 0.0, g);
    CHECK(c.violation() == doctest::Approx(4.0));
}

TEST_CASE("uniform Slater margin and sup norms")
{
    auto p = problems::make_smoke_problem();
    const Lattice grid({{-1.0, 1.0}}, {21});
    const Matrix z = Matrix::Zero(1, 1);
    const auto s = uniform_slater(*p, grid, z);
    CHECK(s.xi == doctest::Approx(11.0));
    CHECK(s.seed_index == 0);
    const auto scaled = uniform_slater(*p, grid, z, one(2.0));
    CHECK(scaled.xi == doctest::Approx(5.5));
    const Vector sup = sup_norms(*p, grid, z);
    CHECK(sup(0) == doctest::Approx(1.0));
    CHECK(sup(1) == doctest::Approx(11.0));
}

TEST_CASE("cumulative sigma bound")
{
    ExperimentTrace empty;
    empty.meta.n_constraints = 1;
    auto r = check_sigma_sum_bound(empty, {1.0, 1.0});
    CHECK(r.functions[0].lhs == 0.0);
    CHECK(r.functions[0].rhs == doctest::Approx(std::sqrt(8.0)));
    CHECK(r.holds());

    // one step from the prior: sigma_0 = sqrt(k(x, x)) with gamma_1 = 1/2 log(1 + k/noise)
    auto p = problems::make_smoke_problem();
    const auto k = gp::KernelSpecd::squared_exponential(1.0, Eigen::Vector2d(0.5, 1.0));
    const auto setup = solver::ModelSetup::shared_noise({k, k}, 1e-4, Lattice({{-1.0, 1.0}}, {21}));
    const auto trace = solver::run_pdcbo(p, solver::ScheduleConfig{}, setup, 1, 1);
    const double gamma = 0.5 * std::log1p(1.0 / 1e-4);
    r = check_sigma_sum_bound(trace, {gamma, gamma});
    CHECK(r.functions[0].lhs == doctest::Approx(1.0));
    CHECK(r.functions[0].lhs <= r.functions[0].rhs);
    CHECK(r.holds());

    r = check_sigma_sum_bound(trace, {0.0, 0.0});
    CHECK_FALSE(r.holds());
}

TEST_CASE("dual bound check")
{
    set_warnings_enabled(false);
    auto p = problems::make_smoke_problem();
    const auto k = gp::KernelSpecd::squared_exponential(1.0, Eigen::Vector2d(0.5, 1.0));
    const auto setup = solver::ModelSetup::shared_noise({k, k}, 1e-4, Lattice({{-1.0, 1.0}}, {21}));

    const auto practical = solver::run_pdcbo(p, solver::ScheduleConfig{}, setup, 1, 5);
    const auto skipped = check_dual_bound(practical);
    CHECK(skipped.skipped);
    CHECK_FALSE(skipped.note.empty());

    solver::ScheduleConfig cfg;
    cfg.mode = solver::ScheduleMode::Theory;
    cfg.c0 = 1.0;
    cfg.c = one(11.0);
    cfg.xi = 9.0;
    const auto theory = solver::run_pdcbo(p, cfg, setup, 1, 20);
    const auto rep = check_dual_bound(theory);
    CHECK_FALSE(rep.skipped);
    const double l1 = theory.meta.epochs.front().lambda1;
    CHECK(0.5 * l1 * l1 <= rep.bound);
    CHECK(rep.bound == doctest::Approx(theory.meta.epochs.front().dual_bound));
    CHECK(rep.holds == (rep.max_value <= rep.bound));
    double worst = 0.0;
    for (const auto& row : theory.rows)
        worst = std::max({worst, 0.5 * row.lambda.squaredNorm(), 0.5 * row.lambda_next.squaredNorm()});
    CHECK(rep.max_value == doctest::Approx(worst));
    set_warnings_enabled(true);
}

TEST_CASE("regret accumulates exactly and is nonnegative at feasible queries")
{
    const auto k = gp::KernelSpecd::squared_exponential(2.0, Eigen::Vector2d(1.0, 1.0));
    auto inst = problems::sample_gp_instance(k, {{-5, 5}}, {{-5, 5}}, 1, 3, {11, 11});
    const auto setup = solver::ModelSetup::shared_noise({k, k}, 0.0025, Lattice({{-5, 5}}, {41}));
    const auto trace = solver::run_pdcbo(inst, solver::ScheduleConfig{}, setup, 8, 40);
    double sum = 0.0;
    for (const auto& row : trace.rows) {
        sum += row.regret;
        CHECK(row.regret == doctest::Approx(row.f_true - row.f_star).scale(1.0));
        CHECK(row.regret_cum == doctest::Approx(sum).epsilon(1e-12));
        if ((row.g_true.array() <= 0.0).all())
            CHECK(row.regret >= -1e-12);
    }
}
