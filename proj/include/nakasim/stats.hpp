#pragma once

#include <cstdint>
#include <vector>

namespace nakasim {

double mean(const std::vector<double>& xs);
double stddev(const std::vector<double>& xs);  // sample standard deviation

struct Interval {
    double mean = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

// Percentile bootstrap of the mean.
Interval bootstrap_mean_ci(const std::vector<double>& xs, double level = 0.95, int resamples = 4000,
                           std::uint64_t seed = 7);

// P[X >= k] for X ~ Binomial(n, p).
double binomial_upper_tail(std::uint64_t k, std::uint64_t n, double p);

// One-sided test of "violation rate <= p": false when k violations out of n
// reject it at level alpha.
bool binomial_within_bound(std::uint64_t k, std::uint64_t n, double p, double alpha = 0.01);

}  // namespace nakasim
