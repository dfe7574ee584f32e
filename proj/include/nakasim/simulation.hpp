#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "nakasim/adversary.hpp"
#include "nakasim/block_store.hpp"
#include "nakasim/lottery.hpp"
#include "nakasim/netenv.hpp"
#include "nakasim/node.hpp"
#include "nakasim/sapos.hpp"
#include "nakasim/trace.hpp"

namespace nakasim {

enum class Protocol { PoW, PoS, SaPoS };

std::string protocol_name(Protocol p);
Protocol parse_protocol(const std::string& s);

struct TxGenConfig {
    double rate = 0.0;      // transactions per second (sigma)
    double tx_size = 0.01;  // fraction of a block
    double t_tput = 0.0;    // burst window, seconds (recorded only)
};

struct ScenarioConfig {
    SimParams params;
    AttackConfig attack;
    SchedulingPolicy policy;
    Protocol protocol = Protocol::PoW;
    SaPoSParams sapos;
    std::int64_t k_cp = 5;  // PoW confirmation depth is 2*K_cp + 1
    TxGenConfig txgen;
    double warmup = 0.0;  // seconds excluded from growth estimates
    bool record_trace = true;
    bool record_deliveries = true;
    std::size_t queue_cap = 100;
    std::size_t cache_cap = 10;
    int repeat = 1;
    std::uint64_t seed_stride = 1;

    std::int64_t k_conf() const { return protocol == Protocol::SaPoS ? sapos.k_conf : 2 * k_cp + 1; }
    void validate() const;
};

struct RunMetrics {
    Slot slots = 0;
    double seconds = 0.0;
    std::uint32_t lmin_start = 0;  // at the end of warm-up
    std::uint32_t lmin_end = 0;
    double growth_rate = 0.0;       // blocks per second
    double growth_normalized = 0.0; // divided by the honest block rate
    std::uint32_t tip_height = 0;
    std::uint32_t agreed_height = 0;
    std::uint64_t blocks = 0;
    std::uint64_t honest_blocks = 0;
    double mean_utilization = 0.0;
    std::vector<double> utilization;  // per honest node, busy / available budget
    std::uint64_t p2_violations = 0;
    std::uint64_t prefix_violations = 0;
    std::uint64_t queue_evictions = 0;
    std::int64_t final_lead = 0;
    std::int64_t max_lead = 0;
    double lead_positive_fraction = 0.0;  // of post-warm-up slots
    std::uint64_t teases = 0;
    std::uint64_t restarts = 0;
    // ledger audits
    std::uint64_t confirmed_reorgs = 0;
    std::uint64_t blank_mismatches = 0;
    std::uint64_t honest_blanked = 0;
    std::uint64_t missing_content = 0;
    std::uint64_t blanked_confirmed = 0;
};

class Simulation {
public:
    explicit Simulation(const ScenarioConfig& cfg);
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    void run();
    void step(Slot slot);
    RunMetrics metrics() const;

    const ScenarioConfig& config() const { return cfg_; }
    const SimParams& params() const { return cfg_.params; }
    const BlockStore& store() const { return store_; }
    BlockStore& store() { return store_; }
    Environment& env() { return env_; }
    const Environment& env() const { return env_; }
    Trace& trace() { return trace_; }
    const Trace& trace() const { return trace_; }
    const Lottery& lottery() const { return lottery_; }
    std::vector<Node>& nodes() { return nodes_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    const Adversary& adversary() const { return adversary_; }
    std::uint32_t honest_count() const { return lottery_.classes().honest_count; }
    Slot current_slot() const { return slot_; }

    // Used by adversary strategies and SPV miners.
    BlockId create_block(const BpoId& bpo, BlockId parent, const BlockContent& content, Slot slot);
    BlockContent empty_content();
    void push_header(NodeId node, BlockId b, Slot slot);
    void push_header_all(BlockId b, Slot slot);
    void upload(BlockId b, const BlockContent& content, Slot slot);
    const BlockContent& content_of(BlockId b) const;
    BlockId best_honest_tip() const;
    std::uint32_t max_honest_height() const;
    std::uint32_t min_honest_height() const;
    BlockId best_public_header() const { return public_best_; }
    BlockId agreed_block() const;

private:
    BlockContent honest_content(BlockId parent, Slot slot);
    void deliver(NodeId n, BlockId b, Slot slot);
    void drain_deliveries(Slot slot);
    void note_public(BlockId b);
    void bookkeeping(Slot slot);

    ScenarioConfig cfg_;
    Lottery lottery_;
    BlockStore store_;
    Environment env_;
    Trace trace_;
    std::uint64_t seen_clock_ = 0;
    std::vector<Node> nodes_;
    Adversary adversary_;
    std::vector<BlockContent> contents_;  // ground truth per block id
    std::vector<TxId> max_tx_;            // highest tx id included up to each block
    TxId tx_generated_ = 0;
    double tx_carry_ = 0.0;
    BlockId public_best_ = kGenesis;
    std::uint64_t public_best_seen_ = 0;
    Slot slot_ = -1;
    Slot warmup_slot_ = 0;
    std::uint32_t lmin_warm_ = 0;
    bool warm_recorded_ = false;
    std::int64_t last_lead_ = 0;
    std::int64_t max_lead_ = 0;
    std::uint64_t lead_positive_slots_ = 0;
    std::uint64_t lead_slots_ = 0;
    bool quiet_ = false;
    std::unordered_map<BlockId, bool> blank_status_;
    RunMetrics audit_;
    std::vector<BlockId> scratch_;
};

// Runs one scenario to completion and returns the metrics.
RunMetrics run_scenario(const ScenarioConfig& cfg, Trace* trace_out = nullptr);

}  // namespace nakasim
