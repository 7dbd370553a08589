#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdcbo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
    bool valid() const { return lo <= hi && std::isfinite(lo) && std::isfinite(hi); }
};

/// Axis-aligned box, one interval per dimension.
using Box = std::vector<Interval>;

inline bool box_valid(const Box& box)
{
    if (box.empty())
        return false;
    for (const auto& iv : box)
        if (!iv.valid())
            return false;
    return true;
}

inline bool box_contains(const Box& box, const Vector& x)
{
    if (static_cast<std::size_t>(x.size()) != box.size())
        return false;
    for (std::size_t i = 0; i < box.size(); ++i)
        if (!box[i].contains(x(static_cast<Index>(i))))
            return false;
    return true;
}

/// Stacks (theta, z) into a single GP input.
inline Vector join_input(const Vector& theta, const Vector& z)
{
    Vector x(theta.size() + z.size());
    x << theta, z;
    return x;
}

/// Raised when a factorization cannot be made positive definite.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, std::vector<double> attempted_jitter = {})
        : std::runtime_error(what), _jitter(std::move(attempted_jitter))
    {
    }

    const std::vector<double>& attempted_jitter() const { return _jitter; }

private:
    std::vector<double> _jitter;
};

/// Steady-state solver did not converge.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual) : std::runtime_error(what), _residual(residual) {}
    double residual() const { return _residual; }

private:
    double _residual;
};

/// Physical model left its valid domain (e.g. negative mass fraction).
class ModelDomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No feasible lattice point exists for a context.
class InfeasibleContextError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace pdcbo
