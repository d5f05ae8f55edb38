#pragma once

#include <cmath>
#include <cstdint>

// Counter-based deterministic random numbers.
//
// Every draw is a pure function of (seed, stream id, counter), so values never
// depend on generation order or thread count. Streams separate logical roles
// (base transform, per-node deviation, train/test embeddings, noise) so that
// e.g. enlarging one matrix does not shift the values of another.

namespace lago::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Stable stream identifiers; values are part of the reproducibility contract.
enum class Stream : std::uint32_t {
    base_transform = 0,
    node_deviation = 1,
    train_victim = 2,
    train_noise = 3,
    test_victim = 4,
    test_noise = 5,
    injected_noise = 6,
};

struct Key {
    std::uint64_t seed = 0;
    Stream stream = Stream::base_transform;
    std::uint32_t node = 0;

    std::uint64_t state() const {
        const std::uint64_t tag =
            (static_cast<std::uint64_t>(stream) << 32) | static_cast<std::uint64_t>(node);
        return splitmix64(splitmix64(seed) ^ tag);
    }
};

inline std::uint64_t bits(const Key& key, std::uint64_t counter) {
    return splitmix64(key.state() ^ splitmix64(counter));
}

/// Uniform draw in (0, 1].
inline double uniform_half_open(const Key& key, std::uint64_t counter) {
    return static_cast<double>((bits(key, counter) >> 11) + 1) * 0x1.0p-53;
}

/// Uniform draw in the open interval (0, 1).
inline double uniform_open(const Key& key, std::uint64_t counter) {
    return (static_cast<double>(bits(key, counter) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller; consumes counters 2k and 2k+1.
inline double normal(const Key& key, std::uint64_t counter) {
    const double u1 = uniform_half_open(key, 2 * counter);
    const double u2 = uniform_half_open(key, 2 * counter + 1);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

/// Zero-mean Laplace draw with the given scale (inverse CDF).
inline double laplace(const Key& key, std::uint64_t counter, double scale) {
    const double u = uniform_open(key, counter);
    return u < 0.5 ? scale * std::log(2.0 * u) : -scale * std::log(2.0 * (1.0 - u));
}

} // namespace lago::rng
