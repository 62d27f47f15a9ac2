#pragma once

#include <cstdint>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace rootbarrier {

using Rng = boost::random::mt19937_64;
using NormalDist = boost::random::normal_distribution<double>;
using UniformDist = boost::random::uniform_real_distribution<double>;

/// Seed of the independent generator for stream `index` (splitmix64 mix).
[[nodiscard]] inline std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace rootbarrier
