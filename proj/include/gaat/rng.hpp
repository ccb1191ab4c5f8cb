#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gaat {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed of a named substream ("split", "node2vec", "init", "dropout", ...)
/// derived from a single run seed.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::string_view name) {
    return mix64(seed ^ fnv1a64(name));
}

constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed ^ mix64(index + 0x5851f42d4c957f2dULL));
}

inline Rng make_rng(std::uint64_t seed, std::string_view name) { return Rng(substream_seed(seed, name)); }

/// Uniform double in [0, 1) built from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n); n > 0. Lemire-style rejection keeps it unbiased.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t r = rng();
    while (r >= limit) r = rng();
    return r % n;
}

}  // namespace gaat
