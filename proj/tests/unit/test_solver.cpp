#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <pdcbo/log.hpp>
#include <pdcbo/problems/gp_sampled.hpp>
#include <pdcbo/solver/pdcbo.hpp>

#include <cmath>
#include <random>

using namespace pdcbo;
using namespace pdcbo::solver;

namespace {
Vector vec(std::initializer_list<double> v)
{
    Vector out(Index(v.size()));
    Index i = 0;
    for (double x : v)
        out(i++) = x;
    return out;
}

DualState dual(const Vector& lambda, double eps, double eta = 1.0)
{
    DualState d;
    d.lambda = lambda;
    d.epsilon = eps;
    d.eta = eta;
    return d;
}

ModelSetup smoke_setup(Index resolution = 21)
{
    const auto k = gp::KernelSpecd::squared_exponential(1.0, Eigen::Vector2d(0.5, 1.0));
    return ModelSetup::shared_noise({k, k}, 1e-4, Lattice({{-1.0, 1.0}}, {resolution}));
}

ScheduleConfig smoke_theory()
{
    ScheduleConfig c;
    c.mode = ScheduleMode::Theory;
    c.c0 = 1.0;
    c.c = vec({11.0});
    c.xi = 9.0;
    c.initial_epoch = 1;
    c.doubling = true;
    return c;
}
} // namespace

TEST_CASE("dual update examples")
{
    CHECK(dual_update(dual(vec({2.0}), 0.1), vec({0.5})).lambda(0) == doctest::Approx(2.6));
    CHECK(dual_update(dual(vec({0.3}), 0.0), vec({-1.0})).lambda(0) == 0.0);
    const auto d = dual_update(dual(vec({1.0, 0.0}), 0.05), vec({-0.2, 0.4}));
    CHECK(d.lambda(0) == doctest::Approx(0.85));
    CHECK(d.lambda(1) == doctest::Approx(0.45));
    CHECK(d.epsilon == 0.05);
    CHECK_THROWS_AS(dual_update(dual(vec({1.0}), 0.0), vec({1.0, 2.0})), std::invalid_argument);
}

TEST_CASE("dual stays nonnegative under random updates")
{
    Rng rng(17);
    std::normal_distribution<double> n(0.0, 2.0);
    DualState d = dual(Vector::Zero(3), 0.1);
    for (int t = 0; t < 500; ++t) {
        d = dual_update(d, Vector::NullaryExpr(3, [&] { return n(rng); }));
        CHECK((d.lambda.array() >= 0.0).all());
    }
}

TEST_CASE("primal step with zero dual minimises the objective bound")
{
    Matrix lower(2, 4);
    lower << 3.0, -1.0, 2.0, -1.0, -5.0, 9.0, -7.0, 1.0;
    double value = 0.0;
    CHECK(primal_argmin(lower, vec({0.0}), 1.0, &value) == 1);
    CHECK(value == -1.0);
}

TEST_CASE("primal step on a single-point grid")
{
    Matrix lower(2, 1);
    lower << 0.7, 0.2;
    double value = 0.0;
    CHECK(primal_argmin(lower, vec({2.0}), 0.5, &value) == 0);
    CHECK(value == doctest::Approx(0.7 + 0.5 * 2.0 * 0.2));
}

TEST_CASE("primal step matches brute force on random three-point grids")
{
    Rng rng(23);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int rep = 0; rep < 200; ++rep) {
        const Matrix lower = Matrix::NullaryExpr(3, 3, [&] { return n(rng); });
        const Vector lambda = Vector::NullaryExpr(2, [&] { return u(rng); });
        const double eta = u(rng);
        Index best = 0;
        double best_v = 1e300;
        for (Index j = 0; j < 3; ++j) {
            const double v = lower(0, j) + eta * (lambda(0) * lower(1, j) + lambda(1) * lower(2, j));
            if (v < best_v) {
                best_v = v;
                best = j;
            }
        }
        double value = 0.0;
        CHECK(primal_argmin(lower, lambda, eta, &value) == best);
        CHECK(value == doctest::Approx(best_v).epsilon(1e-12));
    }
}

TEST_CASE("raising one dual component never raises the chosen constraint bound")
{
    Rng rng(29);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const Matrix lower = Matrix::NullaryExpr(3, 25, [&] { return n(rng); });
        Vector lambda = vec({0.0, 0.5});
        double prev = std::numeric_limits<double>::infinity();
        for (double l0 = 0.0; l0 <= 5.0; l0 += 0.25) {
            lambda(0) = l0;
            const Index j = primal_argmin(lower, lambda, 1.0);
            CHECK(lower(1, j) <= prev + 1e-12);
            prev = lower(1, j);
        }
    }
}

TEST_CASE("ties go to the lowest grid index")
{
    CHECK(primal_argmin(Matrix::Zero(2, 5), vec({1.0}), 1.0) == 0);
}

TEST_CASE("theory epsilon example")
{
    ScheduleConfig c;
    c.mode = ScheduleMode::Theory;
    c.horizon = 10000;
    c.c0 = 1.0;
    c.c = vec({1.0});
    c.xi = 0.5;
    const auto r = theory_epsilon(c, vec({1.0}), vec({1.0}));
    CHECK(r.eta == doctest::Approx(0.01));
    CHECK(r.epsilon == doctest::Approx(0.160825).epsilon(1e-5));
    CHECK_FALSE(r.horizon_too_short);
    CHECK(theory_lambda1(c, r.eta) == doctest::Approx(808.0));
}

TEST_CASE("theory epsilon decreases with the horizon")
{
    ScheduleConfig c;
    c.mode = ScheduleMode::Theory;
    c.c0 = 2.0;
    c.c = vec({1.0, 3.0});
    c.xi = 0.3;
    for (long T : {2L, 10L, 100L, 5000L}) {
        c.horizon = T;
        const double a = theory_epsilon(c, vec({1.0, 2.0}), vec({3.0, 1.0})).epsilon;
        c.horizon = 4 * T;
        const double b = theory_epsilon(c, vec({1.0, 2.0}), vec({3.0, 1.0})).epsilon;
        CHECK(b < a);
    }
}

TEST_CASE("theory epsilon without the Slater term")
{
    ScheduleConfig c;
    c.mode = ScheduleMode::Theory;
    c.horizon = 400;
    c.c0 = 1.5;
    c.c = vec({2.0});
    c.xi = 1e12;
    const double eta = 1.0 / std::sqrt(400.0);
    const double limit = (std::sqrt(4.0 * 1.5 / eta + 4.0 * 4.0) + 8.0 * 0.7 * std::sqrt(400.0 * 2.0)) / 400.0;
    CHECK(theory_epsilon(c, vec({0.7}), vec({2.0})).epsilon == doctest::Approx(limit).epsilon(1e-9));
}

TEST_CASE("initial dual value respects the dual bound")
{
    for (double xi : {0.1, 1.0, 4.0}) {
        for (double eta : {0.01, 0.3, 1.0}) {
            ScheduleConfig c;
            c.c0 = 1.3;
            c.c = vec({0.5, 2.0});
            c.xi = xi;
            const double l1 = theory_lambda1(c, eta);
            const Vector lambda = Vector::Constant(2, l1);
            CHECK(0.5 * lambda.squaredNorm() <= metrics::dual_bound_constant(2, c.c0, c.c.norm(), xi, eta));
        }
    }
}

TEST_CASE("doubling epochs")
{
    CHECK(doubling_epochs(1, 7) == std::vector<long>{1, 2, 4});
    CHECK(doubling_epochs(1, 5) == std::vector<long>{1, 2, 2});
    CHECK(doubling_epochs(3, 3) == std::vector<long>{3});
    CHECK(doubling_epochs(2, 0).empty());
}

TEST_CASE("first step without data picks the first grid point")
{
    auto problem = problems::make_smoke_problem();
    ScheduleConfig c;
    const auto trace = run_pdcbo(problem, c, smoke_setup(), 1, 1);
    REQUIRE(trace.steps() == 1);
    CHECK(trace.rows[0].grid_index == 0);
    CHECK(trace.rows[0].lambda(0) == 0.0);
}

TEST_CASE("smoke problem regret vanishes within ten steps")
{
    auto problem = problems::make_smoke_problem();
    ScheduleConfig c;
    const auto trace = run_pdcbo(problem, c, smoke_setup(), 4, 30);
    for (long t = 10; t < trace.steps(); ++t)
        CHECK(trace.rows[std::size_t(t)].regret == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(trace.rows.back().f_star == 0.0);
}

TEST_CASE("identical seeds give identical traces")
{
    auto problem = problems::make_smoke_problem(0.1);
    ScheduleConfig c;
    auto a = run_pdcbo(problem, c, smoke_setup(), 99, 25);
    auto b = run_pdcbo(problem, c, smoke_setup(), 99, 25);
    a.meta.wall_time_s = b.meta.wall_time_s = 0.0;
    CHECK(a == b);
    auto d = run_pdcbo(problem, c, smoke_setup(), 100, 25);
    CHECK_FALSE(a.rows == d.rows);
}

TEST_CASE("doubling over a single epoch equals one theory run")
{
    set_warnings_enabled(false);
    auto problem = problems::make_smoke_problem();
    auto cfg = smoke_theory();
    cfg.initial_epoch = 8;
    auto single = run_pdcbo(problem, cfg, smoke_setup(), 5, 8);
    auto doubled = run_with_doubling(problem, cfg, smoke_setup(), 5, 8);
    CHECK(single.rows == doubled.rows);
    CHECK(single.meta.epochs == doubled.meta.epochs);
    set_warnings_enabled(true);
}

TEST_CASE("doubling records epoch boundaries and resets the dual")
{
    set_warnings_enabled(false);
    auto problem = problems::make_smoke_problem();
    const auto trace = run_with_doubling(problem, smoke_theory(), smoke_setup(), 5, 7);
    REQUIRE(trace.meta.epochs.size() == 3);
    long start = 1;
    long horizon = 1;
    for (const auto& e : trace.meta.epochs) {
        CHECK(e.start_step == start);
        CHECK(e.horizon == horizon);
        CHECK(trace.rows[std::size_t(start - 1)].lambda(0) == doctest::Approx(e.lambda1));
        start += e.length;
        horizon *= 2;
    }
    CHECK(start == 8);
    set_warnings_enabled(true);
}

TEST_CASE("dual telescoping holds along a run")
{
    set_warnings_enabled(false);
    const auto k = gp::KernelSpecd::squared_exponential(2.0, Eigen::Vector2d(1.0, 1.0));
    auto problem = problems::sample_gp_instance(k, {{-3, 3}}, {{-3, 3}}, 1, 8, {9, 9});
    ScheduleConfig c;
    c.practical_epsilon = 0.05;
    const auto setup = ModelSetup::shared_noise({k, k}, 0.0025, Lattice({{-3, 3}}, {31}));
    const auto trace = run_pdcbo(problem, c, setup, 3, 60);
    Vector sum = trace.rows.front().lambda;
    for (const auto& row : trace.rows) {
        sum.array() += row.lcb_g.array() + c.practical_epsilon;
        CHECK((row.lambda_next - sum).minCoeff() >= -1e-9);
        CHECK((row.lambda.array() >= 0.0).all());
    }
    set_warnings_enabled(true);
}

TEST_CASE("theory schedule needs gamma tables to cover the run")
{
    const auto k = gp::KernelSpecd::squared_exponential(1.0, Eigen::Vector2d(1.0, 1.0));
    const auto g = gamma_sequence(k, 0.01, {{0, 1}, {0, 1}}, 20);
    CHECK(g->size() == 21);
    CHECK(gamma_sequence(k, 0.01, {{0, 1}, {0, 1}}, 20).get() == g.get());
}
