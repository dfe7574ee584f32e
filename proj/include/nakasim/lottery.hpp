#pragma once

#include <cstdint>
#include <vector>

#include "nakasim/types.hpp"

namespace nakasim {

struct SlotOutcome {
    Slot slot = 0;
    std::uint32_t h_count = 0;
    std::uint32_t a_count = 0;
    std::vector<BpoId> bpos;  // sorted by node, seq = position
};

// Node ids [0, honest_count) are honest, the rest are corrupted.
struct NodeClasses {
    std::uint32_t honest_count = 0;
    std::uint32_t adversary_count = 0;

    static NodeClasses split(std::uint32_t n_nodes, double beta);
    bool is_honest(NodeId n) const { return n < honest_count; }
};

class Lottery {
public:
    explicit Lottery(const SimParams& params);

    SlotOutcome sample_slot(Slot slot) const;
    // SPV miners draw from their own stream; rate is blocks per slot.
    std::vector<BpoId> sample_spv(Slot slot, double rate_per_slot) const;

    const NodeClasses& classes() const { return classes_; }

private:
    std::uint64_t seed_;
    double honest_mean_;
    double adversary_mean_;
    NodeClasses classes_;
};

SlotOutcome sample_slot(const SimParams& params, Slot slot);

}  // namespace nakasim
