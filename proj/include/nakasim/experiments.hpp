#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nakasim/simulation.hpp"
#include "nakasim/stats.hpp"

namespace nakasim {

// NAKASIM_THREADS if set, else the hardware thread count.
unsigned worker_threads();
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

struct GrowthSetup {
    AttackKind attack = AttackKind::None;
    Protocol protocol = Protocol::PoW;
    SchedulingPolicy policy;
    double lambda_hon = 1.0;
    double lambda_adv = 0.0;
    double spv_rate = 0.0;
    double capacity = 1.0;
    std::uint32_t n_nodes = 20;
    double tau = 0.1;
    double seconds = 2000.0;
    double warmup = 200.0;
    std::int64_t k_cp = 5;
};

ScenarioConfig growth_config(const GrowthSetup& s, std::uint64_t seed);

// Runs `seeds` seeds (1, 2, ...) of cfg in parallel.
std::vector<RunMetrics> run_seeds(const ScenarioConfig& cfg, int seeds, std::uint64_t first_seed = 1,
                                  std::uint64_t stride = 1);

struct GrowthPoint {
    double capacity = 0.0;
    std::vector<double> normalized;  // growth / lambda_hon, one per seed
    Interval ci;
};

GrowthPoint measure_growth(const GrowthSetup& s, int seeds);

struct FrontierRow {
    double capacity = 0.0;
    double growth = 0.0;  // blocks per second
    double lo = 0.0, hi = 0.0;
    double beta_threshold = 0.0;
};

// Honest growth under the attack at each capacity and the adversary share
// above which the attack outgrows the honest chain.
std::vector<FrontierRow> attack_frontier(const GrowthSetup& base, const std::vector<double>& capacities, int seeds);

// Smallest x with f(x) <= target by linear interpolation over sorted (x, f)
// samples, f decreasing. Returns a negative value when not bracketed.
double crossing(const std::vector<double>& x, const std::vector<double>& f, double target);

}  // namespace nakasim
