// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "isacaf/core.hpp"

namespace isacaf {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a, used to turn component names into stream tags.
inline constexpr std::uint64_t stream_tag(std::string_view name)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed of the sub-stream (base, tag, index). Stable across platforms and worker counts.
inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, std::uint64_t index)
{
    return splitmix64(splitmix64(splitmix64(base) ^ tag) + index);
}

/// A named family of independent random streams, one per trial index.
struct SeedStream {
    std::uint64_t base = 1;
    std::uint64_t tag = 0;

    SeedStream() = default;
    SeedStream(std::uint64_t base_seed, std::string_view name) : base(base_seed), tag(stream_tag(name)) {}

    Rng rng(std::uint64_t index) const { return Rng(derive_seed(base, tag, index)); }

    /// A child family, e.g. one per sweep point.
    SeedStream child(std::string_view name) const
    {
        SeedStream s;
        s.base = derive_seed(base, tag, stream_tag(name));
        s.tag = tag;
        return s;
    }
    SeedStream child(std::uint64_t index) const
    {
        SeedStream s;
        s.base = derive_seed(base, tag ^ 0x5bd1e995ULL, index);
        s.tag = tag;
        return s;
    }
};

/// Uniform index in [0, n) for n a power of two; exact (no modulo bias).
inline std::size_t uniform_index_pow2(Rng& rng, std::size_t n)
{
    if (n <= 1) return 0;
    return static_cast<std::size_t>(rng() >> (64 - log2_exact(n)));
}

/// Circular complex Gaussian with E|z|^2 = variance.
inline cplx complex_gaussian(Rng& rng, double variance)
{
    std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
    const double re = nd(rng);
    const double im = nd(rng);
    return {re, im};
}

} // namespace isacaf
