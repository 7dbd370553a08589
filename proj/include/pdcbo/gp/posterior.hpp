#pragma once

#include <pdcbo/common.hpp>
#include <pdcbo/gp/kernel.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <array>
#include <cmath>
#include <sstream>
#include <utility>

namespace pdcbo::gp {

/// Diagonal jitter levels tried, in order, before a factorization is declared failed.
inline constexpr std::array<double, 4> kJitterLevels = {0.0, 1e-10, 1e-8, 1e-6};

/// Cancellation tolerance for predictive variances, relative to max(1, k(x, x)).
inline constexpr double kVarianceClampTolerance = 1e-9;

template <typename Scalar>
struct JitteredCholesky {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> lower;
    Scalar jitter = Scalar(0);
};

/// Lower Cholesky factor of a + jitter * I using the first jitter level that succeeds
/// with every pivot above sqrt(eps) times the largest.
template <typename Scalar, typename Derived>
JitteredCholesky<Scalar> jittered_cholesky(const Eigen::MatrixBase<Derived>& a)
{
    using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    std::vector<double> tried;
    for (double level : kJitterLevels) {
        tried.push_back(level);
        MatrixType shifted = a;
        shifted.diagonal().array() += Scalar(level);
        Eigen::LLT<MatrixType> llt(shifted);
        if (llt.info() != Eigen::Success)
            continue;
        MatrixType l = llt.matrixL();
        using std::sqrt;
        const Scalar min_pivot = sqrt(Eigen::NumTraits<Scalar>::epsilon()) * l.diagonal().maxCoeff();
        if (!l.allFinite() || !(l.diagonal().minCoeff() > min_pivot))
            continue;
        return {std::move(l), Scalar(level)};
    }
    std::ostringstream msg;
    msg << "Cholesky factorization failed for a " << a.rows() << "x" << a.cols() << " matrix after jitter levels";
    for (double level : tried)
        msg << ' ' << level;
    throw NumericError(msg.str(), tried);
}

template <typename Scalar>
struct Prediction {
    Scalar mean = Scalar(0);
    Scalar variance = Scalar(0);

    Scalar stddev() const
    {
        using std::sqrt;
        return sqrt(variance);
    }
};

namespace detail {
    template <typename Scalar>
    Scalar clamp_variance(Scalar var, Scalar prior)
    {
        if (var >= Scalar(0))
            return var;
        using std::max;
        if (var >= -Scalar(kVarianceClampTolerance) * max(Scalar(1), prior))
            return Scalar(0);
        std::ostringstream msg;
        msg << "negative predictive variance " << var << " (prior " << prior << ")";
        throw NumericError(msg.str());
    }
} // namespace detail

/**
 * Exact GP posterior for a single function with a cached lower Cholesky factor of
 * (K + noise_variance * I) and the weight vector alpha = (K + noise_variance * I)^{-1} y.
 *
 * New observations extend the factor by one bordered row (O(n^2)); every
 * kRefactorInterval observations the factor is rebuilt from scratch to bound drift.
 * Inputs are stored as the columns of a (d x n) matrix.
 */
template <typename Scalar>
class GpPosterior {
public:
    using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    static constexpr Eigen::Index kRefactorInterval = 50;

    GpPosterior() = default;

    GpPosterior(KernelSpec<Scalar> kernel, Scalar noise_variance)
        : _kernel(std::move(kernel)), _noise_variance(noise_variance)
    {
        _kernel.validate();
        if (!(noise_variance >= Scalar(0)) || !std::isfinite(double(noise_variance)))
            throw std::invalid_argument("noise variance must be finite and non-negative");
        _inputs.resize(_kernel.dim(), 0);
    }

    const KernelSpec<Scalar>& kernel() const { return _kernel; }
    Scalar noise_variance() const { return _noise_variance; }
    Scalar jitter() const { return _jitter; }
    Eigen::Index dim() const { return _kernel.dim(); }
    Eigen::Index size() const { return _n; }
    bool empty() const { return _n == 0; }

    auto inputs() const { return _inputs.leftCols(_n); }
    auto observations() const { return _targets.head(_n); }
    auto cholesky_factor() const { return _chol.topLeftCorner(_n, _n); }
    auto alpha() const { return _alpha.head(_n); }

    /// Replaces the data set and refactorizes from scratch.
    template <typename DX, typename DY>
    void condition(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y)
    {
        if (x.rows() != dim())
            throw std::invalid_argument("condition: input rows do not match kernel dimension");
        if (x.cols() != y.size())
            throw std::invalid_argument("condition: input and observation counts differ");
        _n = x.cols();
        reserve(_n);
        _inputs.leftCols(_n) = x;
        _targets.head(_n) = y;
        refactor();
    }

    template <typename DX>
    void add_observation(const Eigen::MatrixBase<DX>& x, Scalar y)
    {
        if (x.size() != dim())
            throw std::invalid_argument("add_observation: input dimension mismatch");
        reserve(_n + 1);
        const Eigen::Index n = _n;
        _inputs.col(n) = x;
        _targets(n) = y;
        _n = n + 1;

        if (n == 0 || _n % kRefactorInterval == 0) {
            refactor();
            return;
        }

        const VectorType kvec = kernel_matrix(_kernel, _inputs.leftCols(n), x);
        const VectorType row = _chol.topLeftCorner(n, n).template triangularView<Eigen::Lower>().solve(kvec);
        const Scalar d2 = kernel_eval(_kernel, x, x) + _noise_variance + _jitter - row.squaredNorm();
        if (!(d2 > Scalar(0)) || !std::isfinite(double(d2))) {
            refactor();
            return;
        }
        _chol.row(n).head(n) = row.transpose();
        _chol.row(n).tail(_chol.cols() - n).setZero();
        _chol(n, n) = std::sqrt(d2);
        update_alpha();
    }

    template <typename DX>
    Prediction<Scalar> predict(const Eigen::MatrixBase<DX>& x) const
    {
        if (x.size() != dim())
            throw std::invalid_argument("predict: input dimension mismatch");
        const Scalar prior = kernel_eval(_kernel, x, x);
        if (_n == 0)
            return {Scalar(0), prior};
        const VectorType kvec = kernel_matrix(_kernel, inputs(), x);
        const Scalar mean = kvec.dot(alpha());
        const VectorType v = cholesky_factor().template triangularView<Eigen::Lower>().solve(kvec);
        return {mean, detail::clamp_variance(prior - v.squaredNorm(), prior)};
    }

    /// Batched prediction at the columns of x.
    template <typename DX>
    void predict(const Eigen::MatrixBase<DX>& x, VectorType& mean, VectorType& variance) const
    {
        if (x.rows() != dim())
            throw std::invalid_argument("predict: input rows do not match kernel dimension");
        variance = kernel_diag(_kernel, x);
        if (_n == 0) {
            mean = VectorType::Zero(x.cols());
            return;
        }
        const MatrixType kstar = kernel_matrix(_kernel, inputs(), x);
        mean = kstar.transpose() * alpha();
        const MatrixType v = cholesky_factor().template triangularView<Eigen::Lower>().solve(kstar);
        const VectorType explained = v.colwise().squaredNorm().transpose();
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            variance(j) = detail::clamp_variance(variance(j) - explained(j), variance(j));
    }

    /// Posterior mean only, at the columns of x.
    template <typename DX>
    VectorType predict_mean(const Eigen::MatrixBase<DX>& x) const
    {
        if (x.rows() != dim())
            throw std::invalid_argument("predict_mean: input rows do not match kernel dimension");
        if (_n == 0)
            return VectorType::Zero(x.cols());
        return kernel_matrix(_kernel, inputs(), x).transpose() * alpha();
    }

    /// Posterior covariance k_t(a, b) between two single inputs.
    template <typename D1, typename D2>
    Scalar covariance(const Eigen::MatrixBase<D1>& a, const Eigen::MatrixBase<D2>& b) const
    {
        const Scalar prior = kernel_eval(_kernel, a, b);
        if (_n == 0)
            return prior;
        const auto lower = cholesky_factor().template triangularView<Eigen::Lower>();
        const VectorType va = lower.solve(kernel_matrix(_kernel, inputs(), a));
        const VectorType vb = lower.solve(kernel_matrix(_kernel, inputs(), b));
        return prior - va.dot(vb);
    }

private:
    void reserve(Eigen::Index n)
    {
        if (n <= _inputs.cols() && n <= _chol.rows())
            return;
        Eigen::Index cap = std::max<Eigen::Index>(16, _inputs.cols());
        while (cap < n)
            cap *= 2;
        _inputs.conservativeResize(dim(), cap);
        _targets.conservativeResize(cap);
        _alpha.conservativeResize(cap);
        MatrixType grown = MatrixType::Zero(cap, cap);
        grown.topLeftCorner(_chol.rows(), _chol.cols()) = _chol;
        _chol = std::move(grown);
    }

    void refactor()
    {
        MatrixType gram = kernel_matrix(_kernel, inputs(), inputs());
        gram.diagonal().array() += _noise_variance;
        auto fact = jittered_cholesky<Scalar>(gram);
        _jitter = fact.jitter;
        _chol.topLeftCorner(_n, _n) = fact.lower;
        update_alpha();
    }

    void update_alpha()
    {
        const auto lower = cholesky_factor().template triangularView<Eigen::Lower>();
        VectorType a = lower.solve(observations());
        lower.transpose().solveInPlace(a);
        _alpha.head(_n) = a;
    }

    KernelSpec<Scalar> _kernel;
    Scalar _noise_variance = Scalar(0);
    Scalar _jitter = Scalar(0);
    Eigen::Index _n = 0;
    MatrixType _inputs;
    VectorType _targets;
    MatrixType _chol;
    VectorType _alpha;
};

using GpPosteriord = GpPosterior<double>;

} // namespace pdcbo::gp
