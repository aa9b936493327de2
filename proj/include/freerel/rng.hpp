#pragma once

// Reproducible randomness. Every randomized corpus is driven by a
// std::mt19937_64 whose seed is derived from (root seed, stream label) by a
// SplitMix64 finalizer, so independent consumers never share a stream and a
// single root seed fixes every output.

#include <cstdint>
#include <random>
#include <string_view>

namespace freerel {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31U);
}

/// FNV-1a over the label, mixed with the root seed.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index = 0) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return splitmix64(splitmix64(root ^ h) + index);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t root, std::string_view label, std::uint64_t index = 0) {
    return Rng(derive_seed(root, label, index));
}

}  // namespace freerel
