#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "nakasim/block_store.hpp"
#include "nakasim/types.hpp"

namespace nakasim {

class Simulation;

enum class AttackKind { None, Private, Teaser, PosTeaser, Partition };

std::string attack_name(AttackKind a);
AttackKind parse_attack(const std::string& s);

struct AttackConfig {
    AttackKind strategy = AttackKind::None;
    double spv_rate = 0.0;            // blocks per second mined by SPV miners
    double partition_duration = 0.0;  // seconds
    double run_after = 0.0;           // seconds before the attack starts
};

struct AdversaryState {
    BlockId fork_base = kGenesis;
    std::vector<BlockId> private_chain;  // withheld chain above fork_base, lowest first
    std::size_t headers_released = 0;    // prefix of private_chain made public
    std::size_t contents_released = 0;   // prefix whose content was uploaded
    std::int64_t lead = 0;
    std::uint32_t last_teased_height = 0;
    std::uint64_t restarts = 0;
    std::uint64_t teases = 0;

    std::uint64_t copies = 0;  // PoS teaser: equivocated copies released
};

class Adversary {
public:
    explicit Adversary(const AttackConfig& cfg) : cfg_(cfg) {}

    const AttackConfig& config() const { return cfg_; }
    const AdversaryState& state() const { return st_; }

    // An honest node announced block b (called as it is broadcast).
    void on_honest_block(BlockId b, std::uint32_t height);
    void step(Simulation& sim, Slot slot, const std::vector<BpoId>& bpos);

    std::uint32_t private_height(const Simulation& sim) const;

private:
    void private_attack_step(Simulation& sim, Slot slot, const std::vector<BpoId>& bpos);
    void teaser_step(Simulation& sim, Slot slot, const std::vector<BpoId>& bpos);
    void pos_teaser_step(Simulation& sim, Slot slot, const std::vector<BpoId>& bpos);
    void restart_if_beaten(Simulation& sim);
    void mine(Simulation& sim, Slot slot, const BpoId& bpo);
    void tease(Simulation& sim, Slot slot, std::uint32_t h);
    void release_copy(Simulation& sim, Slot slot, std::uint32_t h);

    AttackConfig cfg_;
    AdversaryState st_;
    std::uint32_t announced_height_ = 0;
    std::uint64_t mined_ = 0;
};

}  // namespace nakasim
