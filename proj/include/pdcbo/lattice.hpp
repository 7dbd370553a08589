#pragma once

#include <pdcbo/common.hpp>

#include <vector>

namespace pdcbo {

/**
 * Regular tensor-product lattice over a box. Points are enumerated with the first
 * dimension varying fastest and stored as the columns of points().
 */
class Lattice {
public:
    Lattice() = default;
    Lattice(Box box, std::vector<Index> resolution);

    const Box& box() const { return _box; }
    const std::vector<Index>& resolution() const { return _resolution; }
    Index dim() const { return static_cast<Index>(_box.size()); }
    Index size() const { return _points.cols(); }
    const Matrix& points() const { return _points; }
    Vector point(Index i) const { return _points.col(i); }

    std::vector<Index> multi_index(Index flat) const;
    Index flat_index(const std::vector<Index>& multi) const;

    /// Indices of lattice neighbours differing by one step in a single dimension.
    std::vector<Index> neighbours(Index flat) const;

    /// Index of the lattice node nearest to x (per-dimension rounding).
    Index nearest(const Vector& x) const;

    /// Lattice with every resolution r replaced by 2r - 1 (old nodes are kept).
    Lattice refined() const;

private:
    Box _box;
    std::vector<Index> _resolution;
    Matrix _points;
};

/// First `count` points of the Halton sequence (bases 2, 3, 5, ...) scaled into box.
Matrix halton_points(const Box& box, Index count);

} // namespace pdcbo
