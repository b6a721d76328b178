#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace symdiff {

using Rng = std::mt19937_64;

// Uniform draws built directly on the mt19937_64 output stream so that a
// given seed produces the same values on every platform (std::uniform_*
// distributions are implementation-defined).

// Uniform integer in [0, n). n >= 1.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    // rejection sampling over the largest multiple of n below 2^64
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_real(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform_real(rng) < p; }

// Standard normal via Box-Muller; consumes two uniforms per draw.
inline double normal(Rng& rng) {
    double u1 = uniform_real(rng);
    const double u2 = uniform_real(rng);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Independent substream for item `index` of a batch seeded with `seed`.
inline Rng substream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

}  // namespace symdiff
