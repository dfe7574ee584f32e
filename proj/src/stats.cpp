#include "nakasim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace nakasim {

double mean(const std::vector<double>& xs)
{
    if (xs.empty())
        return 0.0;
    double s = 0.0;
    for (double x : xs)
        s += x;
    return s / static_cast<double>(xs.size());
}

double stddev(const std::vector<double>& xs)
{
    if (xs.size() < 2)
        return 0.0;
    double m = mean(xs), s = 0.0;
    for (double x : xs)
        s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

Interval bootstrap_mean_ci(const std::vector<double>& xs, double level, int resamples, std::uint64_t seed)
{
    Interval out;
    out.mean = mean(xs);
    if (xs.size() < 2) {
        out.lo = out.hi = out.mean;
        return out;
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
    std::vector<double> means(static_cast<std::size_t>(resamples));
    for (auto& m : means) {
        double s = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i)
            s += xs[pick(rng)];
        m = s / static_cast<double>(xs.size());
    }
    std::sort(means.begin(), means.end());
    double tail = (1.0 - level) / 2.0;
    auto idx = [&](double q) {
        auto i = static_cast<std::size_t>(std::floor(q * static_cast<double>(means.size() - 1)));
        return means[std::min(i, means.size() - 1)];
    };
    out.lo = idx(tail);
    out.hi = idx(1.0 - tail);
    return out;
}

double binomial_upper_tail(std::uint64_t k, std::uint64_t n, double p)
{
    if (k == 0)
        return 1.0;
    if (k > n || p <= 0.0)
        return 0.0;
    if (p >= 1.0)
        return 1.0;
    double lp = std::log(p), lq = std::log1p(-p);
    double ln = std::lgamma(static_cast<double>(n) + 1.0);
    double total = 0.0;
    for (std::uint64_t i = k; i <= n; ++i) {
        double lt = ln - std::lgamma(static_cast<double>(i) + 1.0) - std::lgamma(static_cast<double>(n - i) + 1.0) +
                    static_cast<double>(i) * lp + static_cast<double>(n - i) * lq;
        double t = std::exp(lt);
        total += t;
        if (static_cast<double>(i) > static_cast<double>(n) * p && t < total * 1e-17)
            break;
    }
    return std::min(total, 1.0);
}

bool binomial_within_bound(std::uint64_t k, std::uint64_t n, double p, double alpha)
{
    if (p >= 1.0)
        return true;
    return binomial_upper_tail(k, n, p) > alpha;
}

}  // namespace nakasim
