#pragma once

#include <cstdint>

namespace nakasim {

std::uint64_t splitmix64(std::uint64_t x);

// Stateless draw keyed on (seed, slot, stream, draw index).
std::uint64_t counter_hash(std::uint64_t seed, std::int64_t slot, std::uint32_t stream, std::uint32_t draw);

// Uniform in the open interval (0, 1).
double counter_uniform(std::uint64_t seed, std::int64_t slot, std::uint32_t stream, std::uint32_t draw);

// Poisson(mean) by inversion of the cdf at u.
std::uint32_t poisson_inverse(double mean, double u);

enum Stream : std::uint32_t {
    kHonestStream = 0,
    kAdversaryStream = 1,
    kSpvStream = 2,
    kAssignStream = 3,
    kNonceStream = 4,
};

}  // namespace nakasim
