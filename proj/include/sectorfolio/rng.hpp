#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sectorfolio {

/// 64-bit finalizer (splitmix64 output mix). Used only to derive seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed for an independent substream keyed by an integer (draw index, worker index).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) {
    return mix64(mix64(seed) ^ mix64(key + 0x632be59bd9b4e019ULL));
}

/// Seed for a named purpose ("frontier:auto", "train:IFY", ...): seed xor tag hash.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) {
    return mix64(seed ^ fnv1a(purpose));
}

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform,
/// unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Fisher-Yates with a fixed index mapping so shuffles replay bit-identically.
template <typename RandomIt>
void shuffle(RandomIt first, RandomIt last, Rng& rng) {
    auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
        auto j = static_cast<decltype(i)>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(first[i], first[j]);
    }
}

} // namespace sectorfolio
