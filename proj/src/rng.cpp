#include "nakasim/rng.hpp"

#include <cmath>

namespace nakasim {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t counter_hash(std::uint64_t seed, std::int64_t slot, std::uint32_t stream, std::uint32_t draw)
{
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(slot));
    h = splitmix64(h ^ ((static_cast<std::uint64_t>(stream) << 32) | draw));
    return h;
}

double counter_uniform(std::uint64_t seed, std::int64_t slot, std::uint32_t stream, std::uint32_t draw)
{
    // 53 random bits, shifted half a step off zero
    return (static_cast<double>(counter_hash(seed, slot, stream, draw) >> 11) + 0.5) * 0x1.0p-53;
}

std::uint32_t poisson_inverse(double mean, double u)
{
    if (mean <= 0.0)
        return 0;
    double p = std::exp(-mean);
    double cdf = p;
    std::uint32_t k = 0;
    while (u > cdf) {
        ++k;
        p *= mean / k;
        cdf += p;
        if (p < 1e-300 && k > mean)  // tail underflow; u sits in the last ulp
            break;
    }
    return k;
}

}  // namespace nakasim
