#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ragic {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives an independent seed for a named purpose ("init", "shuffle",
/// "noise", ...) from the root seed.
inline std::uint64_t substream_seed(std::uint64_t root, std::string_view name) {
    std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return splitmix64(root ^ splitmix64(h));
}

/// Mixes integer coordinates into a seed, e.g. (target, offset, draw).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(seed ^ splitmix64(a));
    s = splitmix64(s ^ splitmix64(b + 0x632BE59BD9B4E019ULL));
    return splitmix64(s ^ splitmix64(c + 0x85157AF5ULL));
}

using Rng = std::mt19937_64;

}  // namespace ragic
