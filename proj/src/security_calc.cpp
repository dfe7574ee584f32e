#include "nakasim/security_calc.hpp"

#include <cmath>
#include <limits>

namespace nakasim {

double p_good(double beta, double rho, std::int64_t nu)
{
    if (rho <= 0.0)
        return 1.0 - beta;  // limit of rho / (1 - e^-rho)
    return (1.0 - beta) * rho * std::exp(-rho * static_cast<double>(nu + 1)) / -std::expm1(-rho);
}

double p_good_limit(double beta, double lambda, double delta_h, double c_tilde, double capacity)
{
    return (1.0 - beta) * std::exp(-lambda * (delta_h + c_tilde / capacity));
}

double p_pp(double p)
{
    if (p <= 0.5)
        return 0.0;
    return (2.0 * p - 1.0) * (2.0 * p - 1.0) / p;
}

double hoeffding_tail_x(double eps, double delta, double n) { return std::exp(-alpha_x(eps) * delta * delta * n); }

double pp_tail(double k1, double k2, double delta, double k_horizon, double /*p_pp*/, double ax, double ap)
{
    return 2.0 * k1 * std::exp(-ap * delta * delta * k2) + k_horizon * k_horizon * std::exp(-ax * k1);
}

bool cp_condition(double c_tilde, double p)
{
    if (p <= 0.5)
        return false;
    // (c/16) (2p-1)^2 / p > 1, cleared of divisions
    double m = 2.0 * p - 1.0;
    return c_tilde * m * m > 16.0 * p;
}

double beta_threshold(double lambda_grwth, double lambda_hon) { return lambda_grwth / (lambda_grwth + lambda_hon); }

double index_time_tail(double k, double delta) { return std::exp(-k * delta * delta / (2.0 * (1.0 + delta))); }

Liveness liveness_latency(double k_cp, double rho, double lambda, double tau, double delta, double t_tput)
{
    Liveness l;
    l.simple = (6.0 * k_cp + 2.0) / rho;
    double per = lambda * tau * (1.0 - delta);
    l.refined = std::max(t_tput, 2.0 * k_cp / per) + (4.0 * k_cp + 2.0) / per;
    return l;
}

Insecure::Insecure(double b)
    : std::runtime_error("no secure block rate at beta = " + std::to_string(b)), beta(b)
{
}

double region_objective(double beta, double capacity, double delta_h, double c)
{
    double arg = 2.0 * (1.0 - beta) * c / (c + 4.0 + std::sqrt(8.0 * c + 16.0));
    return std::log(arg) / (delta_h + c / capacity);
}

RatePoint max_rate(double beta, double capacity, double delta_h)
{
    // log grid, then golden section around the best grid point
    const int n = 4000;
    const double lo = 0.0, hi = std::log(1e5);
    auto at = [&](int i) { return std::exp(lo + (hi - lo) * i / n); };
    int best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        double v = region_objective(beta, capacity, delta_h, at(i));
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    double a = at(std::max(best - 1, 0)), b = at(std::min(best + 1, n));
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = region_objective(beta, capacity, delta_h, c), fd = region_objective(beta, capacity, delta_h, d);
    for (int it = 0; it < 200 && b - a > 1e-10 * b; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = region_objective(beta, capacity, delta_h, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = region_objective(beta, capacity, delta_h, d);
        }
    }
    double x = (a + b) / 2.0;
    double v = region_objective(beta, capacity, delta_h, x);
    if (best_v > v) {
        x = at(best);
        v = best_v;
    }
    if (!(v > 0.0))
        throw Insecure(beta);
    return {v, x};
}

RatePoint max_rate_grid(double beta, double capacity, double delta_h, double step)
{
    RatePoint r{-std::numeric_limits<double>::infinity(), 0.0};
    for (double c = 1.0; c <= 1e5; c += step) {
        double v = region_objective(beta, capacity, delta_h, c);
        if (v > r.lambda_max)
            r = {v, c};
    }
    return r;
}

double cp_boundary_p(double c_tilde)
{
    // 4p^2 - (4 + r) p + 1 = 0 with r = 16 / c_tilde
    double r = 16.0 / c_tilde;
    double b = 4.0 + r;
    return (b + std::sqrt(b * b - 16.0)) / 8.0;
}

std::vector<RegionRow> region_curve(const std::vector<double>& betas, double capacity, double delta_h)
{
    std::vector<RegionRow> out;
    for (double b : betas) {
        RegionRow row{b, 0.0, 0.0, false, "bounded-capacity"};
        try {
            if (b < 0.5) {
                RatePoint p = max_rate(b, capacity, delta_h);
                row.lambda_max = p.lambda_max;
                row.c_tilde = p.c_tilde;
                row.secure = true;
            }
        } catch (const Insecure&) {
        }
        out.push_back(row);
    }
    return out;
}

std::vector<RegionRow> bounded_delay_reference(const std::vector<double>& betas, double capacity)
{
    // lambda_h / (1 + lambda_h * delta) > lambda_a with delta = 1/C
    double delta = 1.0 / capacity;
    std::vector<RegionRow> out;
    for (double b : betas) {
        RegionRow row{b, 0.0, 0.0, b < 0.5, "bounded-delay-reference"};
        if (b <= 0.0)
            row.lambda_max = std::numeric_limits<double>::infinity();
        else if (b < 0.5)
            row.lambda_max = (1.0 - 2.0 * b) / (b * (1.0 - b) * delta);
        out.push_back(row);
    }
    return out;
}

std::optional<KcpChoice> choose_kcp(double p, double delta, double k_horizon, double target)
{
    double pp = p_pp(p);
    if (pp <= 0.0 || delta <= 0.0)
        return std::nullopt;
    double ax = alpha_x(eps_good(p)), ap = alpha_p(pp);
    // smallest k1 for which the second term alone is below target
    auto k1_min = static_cast<std::int64_t>(std::ceil(std::log(k_horizon * k_horizon / target) / ax));
    k1_min = std::max<std::int64_t>(k1_min, 1);
    std::optional<KcpChoice> best;
    for (std::int64_t k1 = k1_min; k1 <= 4 * k1_min; ++k1) {
        double rest = target - k_horizon * k_horizon * std::exp(-ax * k1);
        if (rest <= 0.0)
            continue;
        auto k2 = static_cast<std::int64_t>(std::ceil(std::log(2.0 * k1 / rest) / (ap * delta * delta)));
        k2 = std::max<std::int64_t>(k2, 1);
        while (pp_tail(k1, k2, delta, k_horizon, pp, ax, ap) >= target)
            ++k2;
        std::int64_t kcp = 2 * k1 * k2;
        if (!best || kcp < best->k_cp)
            best = KcpChoice{k1, k2, kcp, pp_tail(k1, k2, delta, k_horizon, pp, ax, ap)};
    }
    return best;
}

}  // namespace nakasim
