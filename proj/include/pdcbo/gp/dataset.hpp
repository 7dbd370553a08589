#pragma once

#include <pdcbo/common.hpp>

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

namespace pdcbo::gp {

/**
 * Evaluation history D_{1:t}: inputs x_t = (theta_t, z_t) as columns and one
 * observation row per function (row 0 is the objective, rows 1..N the constraints).
 */
template <typename Scalar>
class Dataset {
public:
    using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    Dataset() = default;
    Dataset(Eigen::Index input_dim, Eigen::Index n_functions, Scalar noise_variance)
        : _inputs(input_dim, 0), _observations(n_functions, 0), _noise_variance(noise_variance)
    {
        if (input_dim <= 0 || n_functions <= 0)
            throw std::invalid_argument("dataset needs positive input dimension and function count");
        if (!(noise_variance > Scalar(0)))
            throw std::invalid_argument("dataset noise variance must be positive");
    }

    Eigen::Index size() const { return _inputs.cols(); }
    Eigen::Index input_dim() const { return _inputs.rows(); }
    Eigen::Index n_functions() const { return _observations.rows(); }
    Scalar noise_variance() const { return _noise_variance; }

    const MatrixType& inputs() const { return _inputs; }
    const MatrixType& observations() const { return _observations; }
    VectorType observations_of(Eigen::Index fn) const { return _observations.row(fn).transpose(); }

    void append(const VectorType& x, const VectorType& y)
    {
        if (x.size() != input_dim() || y.size() != n_functions())
            throw std::invalid_argument("dataset append: dimension mismatch");
        const Eigen::Index n = size();
        _inputs.conservativeResize(Eigen::NoChange, n + 1);
        _observations.conservativeResize(Eigen::NoChange, n + 1);
        _inputs.col(n) = x;
        _observations.col(n) = y;
    }

    /// Every input lies in theta_box x z_box.
    bool inside(const Box& theta_box, const Box& z_box) const
    {
        Box joint = theta_box;
        joint.insert(joint.end(), z_box.begin(), z_box.end());
        for (Eigen::Index j = 0; j < size(); ++j)
            if (!box_contains(joint, _inputs.col(j).template cast<double>()))
                return false;
        return true;
    }

private:
    MatrixType _inputs;
    MatrixType _observations;
    Scalar _noise_variance = Scalar(0);
};

using Datasetd = Dataset<double>;

} // namespace pdcbo::gp
