#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace ranhpp {

using Engine = std::mt19937_64;

/// Hash a root seed and a path of stream identifiers (run, replication, event, ...)
/// into a 64-bit seed. Distinct paths give statistically independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// Engine for the substream addressed by `path` under `seed`.
Engine make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// Uniform draw on the open interval (0, 1); never returns 0 or 1.
inline double uniform_open(Engine& rng) {
    // 53 random bits, shifted half a step off zero.
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard exponential draw, strictly positive and finite.
inline double standard_exponential(Engine& rng) {
    return -std::log(uniform_open(rng));
}

} // namespace ranhpp
