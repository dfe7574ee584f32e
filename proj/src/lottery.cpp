#include "nakasim/lottery.hpp"

#include <algorithm>
#include <cmath>

#include "nakasim/rng.hpp"

namespace nakasim {

std::int64_t SimParams::header_delay_slots() const
{
    if (delta_h <= 0.0)
        return 0;
    return static_cast<std::int64_t>(std::ceil(delta_h / tau - 1e-9));
}

void SimParams::link_analysis_params()
{
    if (c_tilde > 0.0) {
        double window = delta_h + c_tilde / capacity;
        nu = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::llround(window / tau)) - 1);
    } else {
        c_tilde = std::max(0.0, ((nu + 1) * tau - delta_h) * capacity);
    }
}

void SimParams::validate() const
{
    if (n_nodes == 0)
        throw ConfigError("params.n_nodes", "must be positive");
    if (!(rho > 0.0))
        throw ConfigError("params.rho", "must be positive");
    if (!(tau > 0.0))
        throw ConfigError("params.tau", "must be positive");
    if (!(capacity > 0.0))
        throw ConfigError("params.capacity", "must be positive");
    if (!(beta >= 0.0 && beta < 1.0))
        throw ConfigError("params.beta", "must lie in [0, 1)");
    if (delta_h < 0.0)
        throw ConfigError("params.delta_h", "must be non-negative");
    if (nu < 0)
        throw ConfigError("params.nu", "must be non-negative");
    if (horizon_slots <= 0)
        throw ConfigError("params.horizon_slots", "must be positive");
    double lhs = (nu + 1) * tau;
    double rhs = delta_h + c_tilde / capacity;
    if (std::abs(lhs - rhs) > tau + 1e-9)
        throw ConfigError("params.nu", "(nu+1)*tau must equal delta_h + c_tilde/capacity within one slot");
}

SimParams params_from_rates(double lambda_hon, double lambda_adv, double tau)
{
    SimParams p;
    p.tau = tau;
    p.rho = (lambda_hon + lambda_adv) * tau;
    p.beta = lambda_adv / (lambda_hon + lambda_adv);
    return p;
}

NodeClasses NodeClasses::split(std::uint32_t n_nodes, double beta)
{
    NodeClasses c;
    if (beta > 0.0)
        c.adversary_count = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::lround(beta * n_nodes)));
    c.adversary_count = std::min(c.adversary_count, n_nodes > 1 ? n_nodes - 1 : 0);
    c.honest_count = n_nodes - c.adversary_count;
    return c;
}

Lottery::Lottery(const SimParams& params)
    : seed_(params.seed),
      honest_mean_((1.0 - params.beta) * params.rho),
      adversary_mean_(params.beta * params.rho),
      classes_(NodeClasses::split(params.n_nodes, params.beta))
{
}

SlotOutcome Lottery::sample_slot(Slot slot) const
{
    SlotOutcome out;
    out.slot = slot;
    out.h_count = poisson_inverse(honest_mean_, counter_uniform(seed_, slot, kHonestStream, 0));
    out.a_count = poisson_inverse(adversary_mean_, counter_uniform(seed_, slot, kAdversaryStream, 0));
    if (out.h_count + out.a_count == 0)
        return out;
    if (out.a_count > 0 && classes_.adversary_count == 0)
        out.a_count = 0;  // no corrupted node to hold it

    std::uint32_t draw = 0;
    for (std::uint32_t i = 0; i < out.h_count; ++i) {
        double u = counter_uniform(seed_, slot, kAssignStream, draw++);
        NodeId n = std::min<NodeId>(classes_.honest_count - 1, static_cast<NodeId>(u * classes_.honest_count));
        out.bpos.push_back({slot, n, true, 0});
    }
    for (std::uint32_t i = 0; i < out.a_count; ++i) {
        double u = counter_uniform(seed_, slot, kAssignStream, draw++);
        NodeId n = classes_.honest_count +
                   std::min<NodeId>(classes_.adversary_count - 1, static_cast<NodeId>(u * classes_.adversary_count));
        out.bpos.push_back({slot, n, false, 0});
    }
    std::stable_sort(out.bpos.begin(), out.bpos.end(),
                     [](const BpoId& a, const BpoId& b) { return a.node < b.node; });
    for (std::uint32_t i = 0; i < out.bpos.size(); ++i)
        out.bpos[i].seq = i;
    return out;
}

std::vector<BpoId> Lottery::sample_spv(Slot slot, double rate_per_slot) const
{
    std::vector<BpoId> out;
    std::uint32_t n = poisson_inverse(rate_per_slot, counter_uniform(seed_, slot, kSpvStream, 0));
    // seq continues after the protocol BPOs of the slot so ids never collide
    for (std::uint32_t i = 0; i < n; ++i)
        out.push_back({slot, kSpvNode, false, 1000u + i});
    return out;
}

SlotOutcome sample_slot(const SimParams& params, Slot slot)
{
    SimParams p = params;
    if (p.n_nodes == 0)
        p.n_nodes = 1;
    return Lottery(p).sample_slot(slot);
}

}  // namespace nakasim
