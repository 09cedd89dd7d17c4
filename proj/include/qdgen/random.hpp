#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace qdgen {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent seeds from a master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based seed derivation: stream `i` of `master` never depends on
/// how many other streams were drawn or in which order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform(Rng& rng, double lo, double hi) {
    if (lo == hi)
        return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Uniform index in [0, n). Draws nothing when n == 1 so that single-choice
/// selections leave the random stream untouched.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    if (n <= 1)
        return 0;
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline bool bernoulli(Rng& rng, double p) {
    if (p <= 0.0)
        return false;
    if (p >= 1.0)
        return true;
    return uniform01(rng) < p;
}

inline double normal(Rng& rng, double sigma) {
    if (sigma == 0.0)
        return 0.0;
    return std::normal_distribution<double>(0.0, sigma)(rng);
}

} // namespace qdgen
