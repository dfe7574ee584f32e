#include "nakasim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace nakasim {

unsigned worker_threads()
{
    if (const char* env = std::getenv("NAKASIM_THREADS")) {
        int n = std::atoi(env);
        if (n > 0)
            return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn)
{
    unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_threads(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next++;
                if (i >= n || failed)
                    return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true))
                        error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

ScenarioConfig growth_config(const GrowthSetup& s, std::uint64_t seed)
{
    ScenarioConfig c;
    SimParams& p = c.params;
    p.n_nodes = s.n_nodes;
    p.tau = s.tau;
    p.rho = (s.lambda_hon + s.lambda_adv) * s.tau;
    p.beta = s.lambda_adv / (s.lambda_hon + s.lambda_adv);
    p.capacity = s.capacity;
    p.delta_h = 0.0;
    p.c_tilde = 0.0;
    p.nu = 0;
    p.link_analysis_params();
    p.horizon_slots = static_cast<std::int64_t>(std::llround(s.seconds / s.tau));
    p.seed = seed;
    c.attack.strategy = s.attack;
    c.attack.spv_rate = s.spv_rate;
    c.policy = s.policy;
    c.protocol = s.protocol;
    c.k_cp = s.k_cp;
    c.sapos = SaPoSParams::from_kcp(s.k_cp);
    if (s.protocol == Protocol::SaPoS)
        c.policy.sapos_wrapped = true;
    c.warmup = s.warmup;
    c.record_trace = false;
    return c;
}

std::vector<RunMetrics> run_seeds(const ScenarioConfig& cfg, int seeds, std::uint64_t first_seed, std::uint64_t stride)
{
    std::vector<RunMetrics> out(static_cast<std::size_t>(std::max(seeds, 0)));
    parallel_for(out.size(), [&](std::size_t i) {
        ScenarioConfig c = cfg;
        c.params.seed = first_seed + i * stride;
        out[i] = run_scenario(c);
    });
    return out;
}

GrowthPoint measure_growth(const GrowthSetup& s, int seeds)
{
    GrowthPoint g;
    g.capacity = s.capacity;
    for (const auto& m : run_seeds(growth_config(s, 1), seeds))
        g.normalized.push_back(m.growth_normalized);
    g.ci = bootstrap_mean_ci(g.normalized);
    return g;
}

std::vector<FrontierRow> attack_frontier(const GrowthSetup& base, const std::vector<double>& capacities, int seeds)
{
    std::vector<FrontierRow> rows;
    for (double c : capacities) {
        GrowthSetup s = base;
        s.capacity = c;
        GrowthPoint g = measure_growth(s, seeds);
        FrontierRow r;
        r.capacity = c;
        r.growth = g.ci.mean * s.lambda_hon;
        r.lo = g.ci.lo * s.lambda_hon;
        r.hi = g.ci.hi * s.lambda_hon;
        r.beta_threshold = r.growth / (r.growth + s.lambda_hon);
        rows.push_back(r);
    }
    return rows;
}

double crossing(const std::vector<double>& x, const std::vector<double>& f, double target)
{
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        if (f[i] >= target && f[i + 1] <= target) {
            if (f[i] == f[i + 1])
                return x[i];
            return x[i] + (x[i + 1] - x[i]) * (f[i] - target) / (f[i] - f[i + 1]);
        }
    }
    return -1.0;
}

}  // namespace nakasim
