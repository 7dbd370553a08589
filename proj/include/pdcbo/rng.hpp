#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pdcbo {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stream purposes; the numeric values are part of the seeding scheme and must not change.
enum class Stream : std::uint64_t {
    Problem = 1,
    Context = 2,
    Noise = 3,
    Anchor = 4,
    Replicate = 5,
};

/**
 * Counter-based seed derivation: the seed for a stream is a hash chain over
 * (base, stream tag, counters...). Streams never share state, so adding
 * replicates or functions leaves existing streams untouched.
 */
inline std::uint64_t derive_seed(std::uint64_t base, Stream stream, std::initializer_list<std::uint64_t> counters = {})
{
    std::uint64_t h = mix64(base ^ 0x504443424f2d3031ULL);
    h = mix64(h ^ static_cast<std::uint64_t>(stream));
    for (auto c : counters)
        h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
    return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

} // namespace pdcbo
