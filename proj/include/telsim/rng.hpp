#pragma once

// Deterministic random streams for the Monte Carlo harness.
//
// Every trial owns a private std::mt19937_64 whose seed is derived from the
// master seed and the trial's coordinates (experiment tag, sample size, path
// index, trial index) through splitmix64 mixing. Results therefore do not
// depend on scheduling or on the number of worker threads.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace telsim {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// 64-bit FNV-1a; used for string tags and file fingerprints.
constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Folds each value into the running seed: h <- splitmix64(h ^ splitmix64(v)).
constexpr std::uint64_t mix_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t v : parts) {
        h = splitmix64(h ^ splitmix64(v));
    }
    return h;
}

using Engine = std::mt19937_64;

/// Uniform draw strictly inside (0,1) from the top 53 bits of one engine output.
inline double open_uniform(Engine& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Exponential draw with the given mean, by inversion. Always > 0.
inline double exponential(Engine& rng, double mean) {
    return -mean * std::log(open_uniform(rng));
}

} // namespace telsim
