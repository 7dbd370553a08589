#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

namespace pdcbo::gp {

enum class KernelKind { SquaredExponential, Matern52, Linear };

inline std::string to_string(KernelKind kind)
{
    switch (kind) {
    case KernelKind::SquaredExponential:
        return "squared_exponential";
    case KernelKind::Matern52:
        return "matern52";
    case KernelKind::Linear:
        return "linear";
    }
    return "unknown";
}

inline KernelKind kernel_kind_from_string(const std::string& name)
{
    if (name == "squared_exponential" || name == "se")
        return KernelKind::SquaredExponential;
    if (name == "matern52" || name == "matern-5/2")
        return KernelKind::Matern52;
    if (name == "linear")
        return KernelKind::Linear;
    throw std::invalid_argument("unknown kernel kind '" + name + "'");
}

/**
 * Stationary (SE, Matern-5/2) or linear covariance on stacked inputs x = (theta, z).
 *
 * The squared exponential form carries no factor 1/2 in the exponent:
 *
 *   k(a, b) = s2 * exp(-sum_j ((a_j - b_j) / l_j)^2)
 *
 * Matern-5/2 uses r = ||(a - b) / l||, and the linear kernel is s2 * sum_j a_j b_j / l_j^2.
 */
template <typename Scalar>
struct KernelSpec {
    using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    KernelKind kind = KernelKind::SquaredExponential;
    Scalar signal_variance = Scalar(1);
    VectorType lengthscales;

    KernelSpec() = default;
    KernelSpec(KernelKind k, Scalar variance, VectorType ls) : kind(k), signal_variance(variance), lengthscales(std::move(ls))
    {
        validate();
    }

    static KernelSpec squared_exponential(Scalar variance, VectorType ls)
    {
        return KernelSpec(KernelKind::SquaredExponential, variance, std::move(ls));
    }

    Eigen::Index dim() const { return lengthscales.size(); }

    bool stationary() const { return kind != KernelKind::Linear; }

    /// Same kernel divided by its signal variance, so that k(x, x) <= 1 for stationary kinds.
    KernelSpec normalized() const
    {
        KernelSpec out = *this;
        out.signal_variance = Scalar(1);
        return out;
    }

    void validate() const
    {
        if (!(signal_variance > Scalar(0)))
            throw std::invalid_argument("kernel signal variance must be positive");
        if (lengthscales.size() == 0)
            throw std::invalid_argument("kernel needs at least one lengthscale");
        for (Eigen::Index i = 0; i < lengthscales.size(); ++i)
            if (!(lengthscales(i) > Scalar(0)))
                throw std::invalid_argument("kernel lengthscales must be positive");
    }
};

using KernelSpecd = KernelSpec<double>;

namespace detail {
    template <typename Scalar>
    Scalar matern52(Scalar r)
    {
        using std::exp;
        using std::sqrt;
        const Scalar s5r = sqrt(Scalar(5)) * r;
        return (Scalar(1) + s5r + Scalar(5) * r * r / Scalar(3)) * exp(-s5r);
    }
} // namespace detail

template <typename Scalar, typename D1, typename D2>
Scalar kernel_eval(const KernelSpec<Scalar>& spec, const Eigen::MatrixBase<D1>& x1, const Eigen::MatrixBase<D2>& x2)
{
    if (x1.size() != spec.dim() || x2.size() != spec.dim())
        throw std::invalid_argument("kernel_eval: input dimension " + std::to_string(x1.size()) + "/"
                                    + std::to_string(x2.size()) + " does not match " + std::to_string(spec.dim())
                                    + " lengthscales");
    using std::exp;
    using std::sqrt;
    switch (spec.kind) {
    case KernelKind::SquaredExponential: {
        const Scalar d2 = ((x1 - x2).array() / spec.lengthscales.array()).square().sum();
        return spec.signal_variance * exp(-d2);
    }
    case KernelKind::Matern52: {
        const Scalar r = sqrt(((x1 - x2).array() / spec.lengthscales.array()).square().sum());
        return spec.signal_variance * detail::matern52(r);
    }
    case KernelKind::Linear:
        return spec.signal_variance
            * (x1.array() * x2.array() / spec.lengthscales.array().square()).sum();
    }
    return Scalar(0);
}

/// Cross-covariance between the columns of a (d x n) and b (d x m).
template <typename Scalar, typename D1, typename D2>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> kernel_matrix(const KernelSpec<Scalar>& spec,
                                                                     const Eigen::MatrixBase<D1>& a,
                                                                     const Eigen::MatrixBase<D2>& b)
{
    using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (a.rows() != spec.dim() || b.rows() != spec.dim())
        throw std::invalid_argument("kernel_matrix: input rows do not match kernel dimension");

    const auto inv_l = spec.lengthscales.cwiseInverse();
    const MatrixType sa = inv_l.asDiagonal() * a;
    const MatrixType sb = inv_l.asDiagonal() * b;
    if (spec.kind == KernelKind::Linear)
        return spec.signal_variance * (sa.transpose() * sb);

    MatrixType d2(a.cols(), b.cols());
    for (Eigen::Index j = 0; j < b.cols(); ++j)
        d2.col(j) = (sa.colwise() - sb.col(j)).colwise().squaredNorm().transpose();
    if (spec.kind == KernelKind::SquaredExponential)
        return spec.signal_variance * (-d2.array()).exp().matrix();
    return spec.signal_variance * d2.unaryExpr([](Scalar v) { using std::sqrt; return detail::matern52(sqrt(v)); });
}

/// Prior variance k(x, x) at each column of x.
template <typename Scalar, typename D>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> kernel_diag(const KernelSpec<Scalar>& spec, const Eigen::MatrixBase<D>& x)
{
    if (spec.stationary())
        return Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Constant(x.cols(), spec.signal_variance);
    return spec.signal_variance
        * (spec.lengthscales.cwiseInverse().asDiagonal() * x).colwise().squaredNorm().transpose();
}

} // namespace pdcbo::gp
