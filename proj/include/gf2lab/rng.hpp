#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "bitvec.hpp"

namespace gf2lab {

/// Project-wide generator. std::mt19937_64 output is fixed by the standard,
/// and every derived draw below uses only raw outputs, so streams are
/// reproducible across platforms.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

/// Uniform in [0, bound) by rejection.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (;;) {
        const std::uint64_t r = rng();
        if (r < limit) return r % bound;
    }
}

inline BitVec random_bitvec(Rng& rng, std::size_t len) {
    BitVec v(len);
    for (auto& w : v.mutable_words()) w = rng();
    v.trim();
    return v;
}

inline std::uint64_t random_bits(Rng& rng, unsigned len) {
    return len >= 64 ? rng() : (rng() & ((std::uint64_t{1} << len) - 1));
}

}  // namespace gf2lab
