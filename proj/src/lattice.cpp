#include <pdcbo/lattice.hpp>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>

namespace pdcbo {

Lattice::Lattice(Box box, std::vector<Index> resolution) : _box(std::move(box)), _resolution(std::move(resolution))
{
    if (!box_valid(_box))
        throw std::invalid_argument("lattice box must be non-empty and finite");
    if (_resolution.size() != _box.size())
        throw std::invalid_argument("lattice resolution must have one entry per box dimension");
    Index total = 1;
    for (std::size_t d = 0; d < _box.size(); ++d) {
        if (_resolution[d] < 1)
            throw std::invalid_argument("lattice resolution must be positive");
        if (_resolution[d] == 1 && _box[d].width() > 0.0)
            throw std::invalid_argument("lattice resolution 1 needs a degenerate interval");
        total *= _resolution[d];
    }
    _points.resize(dim(), total);
    for (Index flat = 0; flat < total; ++flat) {
        const auto mi = multi_index(flat);
        for (Index d = 0; d < dim(); ++d) {
            const auto& iv = _box[static_cast<std::size_t>(d)];
            const Index r = _resolution[static_cast<std::size_t>(d)];
            _points(d, flat) = r == 1 ? iv.lo : iv.lo + iv.width() * double(mi[static_cast<std::size_t>(d)]) / double(r - 1);
        }
    }
}

std::vector<Index> Lattice::multi_index(Index flat) const
{
    std::vector<Index> mi(_resolution.size());
    for (std::size_t d = 0; d < _resolution.size(); ++d) {
        mi[d] = flat % _resolution[d];
        flat /= _resolution[d];
    }
    return mi;
}

Index Lattice::flat_index(const std::vector<Index>& multi) const
{
    Index flat = 0;
    Index stride = 1;
    for (std::size_t d = 0; d < _resolution.size(); ++d) {
        flat += multi[d] * stride;
        stride *= _resolution[d];
    }
    return flat;
}

std::vector<Index> Lattice::neighbours(Index flat) const
{
    std::vector<Index> out;
    auto mi = multi_index(flat);
    for (std::size_t d = 0; d < mi.size(); ++d) {
        for (Index step : {Index(-1), Index(1)}) {
            const Index v = mi[d] + step;
            if (v < 0 || v >= _resolution[d])
                continue;
            auto other = mi;
            other[d] = v;
            out.push_back(flat_index(other));
        }
    }
    return out;
}

Index Lattice::nearest(const Vector& x) const
{
    std::vector<Index> mi(_resolution.size());
    for (std::size_t d = 0; d < mi.size(); ++d) {
        const Index r = _resolution[d];
        if (r == 1) {
            mi[d] = 0;
            continue;
        }
        const double u = (x(Index(d)) - _box[d].lo) / _box[d].width() * double(r - 1);
        mi[d] = std::clamp<Index>(static_cast<Index>(std::lround(u)), 0, r - 1);
    }
    return flat_index(mi);
}

Lattice Lattice::refined() const
{
    std::vector<Index> res = _resolution;
    for (auto& r : res)
        r = r == 1 ? 1 : 2 * r - 1;
    return Lattice(_box, std::move(res));
}

namespace {
    double radical_inverse(Index n, int base)
    {
        double inv = 1.0 / base;
        double f = inv;
        double out = 0.0;
        while (n > 0) {
            out += f * double(n % base);
            n /= base;
            f *= inv;
        }
        return out;
    }
} // namespace

Matrix halton_points(const Box& box, Index count)
{
    static constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    if (box.size() > std::size(kPrimes))
        throw std::invalid_argument("halton_points: at most 12 dimensions supported");
    Matrix pts(static_cast<Index>(box.size()), count);
    for (Index j = 0; j < count; ++j)
        for (std::size_t d = 0; d < box.size(); ++d)
            pts(Index(d), j) = box[d].lo + box[d].width() * radical_inverse(j + 1, kPrimes[d]);
    return pts;
}

} // namespace pdcbo
