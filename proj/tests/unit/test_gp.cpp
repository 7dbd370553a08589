#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <pdcbo/gp/bounds.hpp>
#include <pdcbo/gp/dataset.hpp>
#include <pdcbo/gp/info_gain.hpp>
#include <pdcbo/gp/kernel.hpp>
#include <pdcbo/gp/posterior.hpp>
#include <pdcbo/log.hpp>
#include <pdcbo/rng.hpp>

#include <Eigen/Cholesky>

#include <cmath>
#include <random>

using namespace pdcbo;
using namespace pdcbo::gp;

namespace {
KernelSpecd se2() { return KernelSpecd::squared_exponential(2.0, Eigen::Vector2d(1.0, 1.0)); }

Matrix random_inputs(Rng& rng, Index d, Index n)
{
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    Matrix x(d, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < d; ++i)
            x(i, j) = u(rng);
    return x;
}
} // namespace

TEST_CASE("SE kernel values")
{
    const auto k = se2();
    CHECK(kernel_eval(k, Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0)) == doctest::Approx(2.0));
    CHECK(kernel_eval(k, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)) == doctest::Approx(0.735759).epsilon(1e-6));
}

TEST_CASE("stationary kernels have k(x, x) = signal variance and never exceed it")
{
    Rng rng(3);
    for (auto kind : {KernelKind::SquaredExponential, KernelKind::Matern52}) {
        const KernelSpecd k(kind, 1.7, Eigen::Vector3d(0.5, 2.0, 1.0));
        const Matrix x = random_inputs(rng, 3, 12);
        const Matrix K = kernel_matrix(k, x, x);
        CHECK(K.diagonal().isApproxToConstant(1.7, 1e-14));
        CHECK(K.maxCoeff() <= 1.7 + 1e-14);
        CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK_NOTHROW(jittered_cholesky<double>(K));
    }
}

TEST_CASE("normalized view has unit signal variance")
{
    const auto n = se2().normalized();
    CHECK(n.signal_variance == 1.0);
    CHECK(n.lengthscales == se2().lengthscales);
}

TEST_CASE("kernel rejects invalid hyperparameters")
{
    CHECK_THROWS_AS(KernelSpecd::squared_exponential(0.0, Eigen::Vector2d(1, 1)), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpecd::squared_exponential(1.0, Eigen::Vector2d(1, -1)), std::invalid_argument);
    CHECK_THROWS_AS(kernel_eval(se2(), Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0, 0, 0)), std::invalid_argument);
}

TEST_CASE("empty posterior is the prior")
{
    GpPosteriord gp(se2(), 0.0025);
    const auto p = gp.predict(Eigen::Vector2d(0.3, -4.0));
    CHECK(p.mean == 0.0);
    CHECK(p.variance == 2.0);
    CHECK(p.stddev() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("one observation posterior")
{
    GpPosteriord gp(se2(), 0.0025);
    const Eigen::Vector2d x0(0.0, 0.0);
    gp.add_observation(x0, 1.0);
    const auto p = gp.predict(x0);
    CHECK(p.mean == doctest::Approx(0.998752).epsilon(1e-6));
    CHECK(p.variance == doctest::Approx(0.002497).epsilon(1e-4));
    CHECK(p.variance < 2.0);
}

TEST_CASE("batched prediction is pointwise")
{
    Rng rng(11);
    GpPosteriord gp(se2(), 0.01);
    const Matrix x = random_inputs(rng, 2, 8);
    gp.condition(x, Vector::LinSpaced(8, -1.0, 1.0));
    const Matrix a = random_inputs(rng, 2, 1), b = random_inputs(rng, 2, 1);
    Matrix ab(2, 2);
    ab << a, b;
    Vector m1, v1, m2, v2;
    gp.predict(a, m1, v1);
    gp.predict(ab, m2, v2);
    CHECK(m1(0) == doctest::Approx(m2(0)).epsilon(1e-14));
    CHECK(v1(0) == doctest::Approx(v2(0)).epsilon(1e-14));
}

TEST_CASE("incremental conditioning matches batch conditioning")
{
    Rng rng(5);
    const Matrix x = random_inputs(rng, 2, 120);
    const Vector y = Vector::LinSpaced(120, -2.0, 2.0).array().sin();
    GpPosteriord inc(se2(), 0.0025), batch(se2(), 0.0025);
    for (Index j = 0; j < x.cols(); ++j)
        inc.add_observation(x.col(j), y(j));
    batch.condition(x, y);
    const Matrix t = random_inputs(rng, 2, 20);
    Vector mi, vi, mb, vb;
    inc.predict(t, mi, vi);
    batch.predict(t, mb, vb);
    CHECK((mi - mb).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((vi - vb).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((vi.array() >= 0.0).all());
}

TEST_CASE("duplicate inputs without noise fall back to jitter")
{
    GpPosteriord gp(se2(), 0.0);
    Matrix x(2, 2);
    x << 0.5, 0.5, 0.5, 0.5;
    gp.condition(x, Eigen::Vector2d(1.0, 1.0));
    CHECK(gp.jitter() > 0.0);
    CHECK(gp.predict(Eigen::Vector2d(0.5, 0.5)).variance >= 0.0);
}

TEST_CASE("jittered Cholesky reports every attempted level on failure")
{
    Matrix a(2, 2);
    a << 1.0, 0.0, 0.0, -1.0;
    try {
        jittered_cholesky<double>(a);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(e.attempted_jitter().size() == kJitterLevels.size());
    }
}

TEST_CASE("templated on scalar: long double posterior agrees with double")
{
    using KL = KernelSpec<long double>;
    GpPosterior<long double> gl(KL::squared_exponential(2.0L, Eigen::Matrix<long double, 2, 1>(1.0L, 1.0L)), 0.0025L);
    GpPosteriord gd(se2(), 0.0025);
    gl.add_observation(Eigen::Matrix<long double, 2, 1>(0.2L, 0.1L), 0.5L);
    gd.add_observation(Eigen::Vector2d(0.2, 0.1), 0.5);
    const auto pl = gl.predict(Eigen::Matrix<long double, 2, 1>(0.0L, 0.0L));
    const auto pd = gd.predict(Eigen::Vector2d(0.0, 0.0));
    CHECK(double(pl.mean) == doctest::Approx(pd.mean).epsilon(1e-12));
    CHECK(double(pl.variance) == doctest::Approx(pd.variance).epsilon(1e-10));
}

TEST_CASE("confidence bounds")
{
    const double s2 = std::sqrt(2.0);
    auto b = confidence_bounds(0.0, s2, 1.0, 10.0);
    CHECK(b.lower == doctest::Approx(-1.41421).epsilon(1e-5));
    CHECK(b.upper == doctest::Approx(1.41421).epsilon(1e-5));
    b = confidence_bounds(0.0, s2, 1.0, 1.0);
    CHECK(b.lower == -1.0);
    CHECK(b.upper == 1.0);
    b = confidence_bounds(0.9988, 0.04997, 1.0, 10.0);
    CHECK(b.lower == doctest::Approx(0.94883).epsilon(1e-9));
    CHECK(b.upper == doctest::Approx(1.04877).epsilon(1e-9));
}

TEST_CASE("confidence bounds of the one-point posterior")
{
    GpPosteriord gp(se2(), 0.0025);
    gp.add_observation(Eigen::Vector2d(0.0, 0.0), 1.0);
    const auto p = gp.predict(Eigen::Vector2d(0.0, 0.0));
    const auto b = confidence_bounds(p.mean, p.stddev(), 1.0, 10.0);
    CHECK(b.lower == doctest::Approx(0.9487827812829225).epsilon(1e-9));
    CHECK(b.upper == doctest::Approx(1.0487203398157041).epsilon(1e-9));
}

TEST_CASE("crossed bounds degrade to (-C, C) with a warning")
{
    set_warnings_enabled(false);
    const long before = warning_count();
    const auto b = confidence_bounds(50.0, 0.1, 1.0, 2.0);
    CHECK(b.lower == -2.0);
    CHECK(b.upper == 2.0);
    CHECK(warning_count() == before + 1);
    set_warnings_enabled(true);
}

TEST_CASE("beta schedule")
{
    const auto c = BetaSchedule::constant(1.0);
    CHECK(c.beta_value(0, 1, 0.0) == 1.0);
    CHECK(c.beta_value(1, 500, 123.0) == 1.0);

    BetaSchedule t;
    t.mode = BetaMode::Theory;
    t.rkhs_bounds = {1.0, 1.0};
    t.noise_sub_gaussian = 0.05;
    t.delta = 0.05;
    t.n_constraints = 1;
    CHECK(t.beta_value(0, 1, 0.0) == doctest::Approx(1.15312).epsilon(1e-5));
    double prev = 0.0;
    for (double g : {0.0, 0.5, 2.0, 10.0}) {
        const double v = t.beta_value(0, 3, g);
        CHECK(v >= prev);
        prev = v;
    }
    t.noise_sub_gaussian = 0.0;
    CHECK(t.beta_value(1, 7, 4.0) == 1.0);
}

TEST_CASE("greedy information gain")
{
    Matrix grid = Matrix::Zero(2, 1);
    const auto seq = info_gain_greedy_sequence(se2(), 0.0025, grid, 1);
    CHECK(seq[0] == 0.0);
    CHECK(seq[1] == doctest::Approx(3.34296).epsilon(1e-5));

    Rng rng(9);
    const Matrix cand = random_inputs(rng, 2, 40);
    const auto s = info_gain_greedy_sequence(se2(), 0.01, cand, 60);
    for (std::size_t k = 1; k < s.size(); ++k)
        CHECK(s[k] >= s[k - 1]);
}

TEST_CASE("dataset keeps one observation row per function")
{
    Datasetd d(2, 3, 0.01);
    d.append(Eigen::Vector2d(0.0, 1.0), Eigen::Vector3d(1.0, 2.0, 3.0));
    d.append(Eigen::Vector2d(0.5, -1.0), Eigen::Vector3d(4.0, 5.0, 6.0));
    CHECK(d.size() == 2);
    CHECK(d.observations_of(1) == Eigen::Vector2d(2.0, 5.0));
    CHECK(d.inside({{-1, 1}}, {{-1, 1}}));
    CHECK_FALSE(d.inside({{0, 0.4}}, {{-1, 1}}));
    CHECK_THROWS_AS(d.append(Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0)), std::invalid_argument);
}
