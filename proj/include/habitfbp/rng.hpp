#pragma once

#include <cstdint>

#include <boost/math/distributions/normal.hpp>

namespace habitfbp::rng {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Stateless counter-based stream: the draw depends only on (seed, path, k),
// so path i is the same regardless of how many paths are run and the work
// can be partitioned across threads freely.
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t path, std::uint64_t k) {
    const std::uint64_t key = splitmix64(splitmix64(seed) + path);
    return splitmix64(key + k);
}

// uniform in the open interval (0, 1)
inline double uniform01(std::uint64_t seed, std::uint64_t path, std::uint64_t k) {
    return (static_cast<double>(mix(seed, path, k) >> 11) + 0.5) * 0x1.0p-53;
}

// standard normal via the inverse CDF; platform-reproducible
inline double gauss(std::uint64_t seed, std::uint64_t path, std::uint64_t k) {
    static const boost::math::normal_distribution<double> unit{};
    return boost::math::quantile(unit, uniform01(seed, path, k));
}

}  // namespace habitfbp::rng
