#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nakasim/block_store.hpp"
#include "nakasim/netenv.hpp"
#include "nakasim/sapos.hpp"
#include "nakasim/trace.hpp"

namespace nakasim {

enum class PolicyKind { LongestHeaderChain, Greedy, FreshestBlock };

struct SchedulingPolicy {
    PolicyKind kind = PolicyKind::LongestHeaderChain;
    bool sapos_wrapped = false;

    std::string name() const;
    static SchedulingPolicy parse(const std::string& s);
};

enum class HeaderVerdict { Accepted, Duplicate, Invalid };

struct NodeConfig {
    NodeId id = 0;
    SchedulingPolicy policy;
    bool pos = false;  // PoS lottery: headers may equivocate
    SaPoSParams sapos;
    std::int64_t k_conf = 0;
    std::size_t queue_cap = 100;
    std::size_t cache_cap = 10;
};

// Shared by all nodes of one run.
struct NodeContext {
    BlockStore* store = nullptr;
    Environment* env = nullptr;
    Trace* trace = nullptr;
    std::uint64_t* seen_clock = nullptr;  // global arrival order for first-seen ties
};

struct NodeStats {
    std::uint64_t fetched = 0;
    std::uint64_t blanked = 0;
    std::uint64_t unavailable = 0;
    std::uint64_t preemptions = 0;
    std::uint64_t evicted_partial = 0;
    std::uint64_t queue_evictions = 0;
    std::uint64_t p2_violations = 0;
    std::uint64_t queue_rebuilds = 0;
    std::uint64_t prefix_violations = 0;
    double busy = 0.0;  // budget spent, blocks
};

struct ConfirmationUpdate {
    std::vector<BlockId> newly_confirmed;
    bool reorged = false;  // a previously confirmed block left the prefix
    BlockId confirmed_tip = kGenesis;
};

class Node : public HeaderKnowledge {
public:
    Node(const NodeConfig& cfg, const NodeContext& ctx);

    NodeId id() const { return cfg_.id; }
    const NodeConfig& config() const { return cfg_; }

    // Delivers a header; unknown ancestors are taken from the store first
    // (a header always arrives with its chain). Newly accepted headers are
    // appended to `accepted` for relaying.
    HeaderVerdict on_header(BlockId b, Slot slot, std::vector<BlockId>* accepted = nullptr);

    std::optional<BlockId> schedule_target();
    void process_step(Slot slot);

    // Builds a block on dChain (or on `parent_override`) and marks it processed.
    BlockId produce(const BpoId& bpo, Slot slot, const BlockContent& content, BlockId parent_override = kNoBlock);

    ConfirmationUpdate advance_confirmation();
    BlockId confirmed_tip() const { return confirmed_tip_; }
    // Transactions of the k_conf-deep prefix; blank blocks contribute nothing.
    std::vector<TxId> output_ledger(std::int64_t k_conf) const;

    BlockId dchain_tip() const { return dtip_; }
    std::uint32_t dchain_height() const;

    bool knows(BlockId b) const override { return b < flags_.size() && (flags_[b] & kKnown); }
    bool processed(BlockId b) const { return b < flags_.size() && (flags_[b] & kProcessed); }
    bool blank(BlockId b) const { return b < flags_.size() && (flags_[b] & kBlank); }
    bool has_real_content(BlockId b) const { return b == kGenesis || (b < flags_.size() && (flags_[b] & kReal)); }
    std::uint64_t seen_order(BlockId b) const { return b < seen_.size() ? seen_[b] : 0; }

    std::size_t queue_size() const { return queue_.size(); }
    std::size_t cache_size() const { return cache_.size(); }
    double cached_progress(BlockId b) const;
    const NodeStats& stats() const { return stats_; }
    bool idle() const { return idle_; }

private:
    enum Flag : std::uint8_t {
        kKnown = 1,
        kProcessed = 2,
        kBlank = 4,
        kUnavailable = 8,
        kInvalid = 16,
        kReal = 32,
    };

    struct Candidate {
        BlockId tip = kNoBlock;
        std::vector<BlockId> path;  // unprocessed blocks, lowest first
        std::size_t cursor = 0;
        BlockId next() const { return path[cursor]; }
    };

    struct Partial {
        BlockId block = kNoBlock;
        double progress = 0.0;
        Slot last_slot = -1;
        double paid_last_slot = 0.0;
    };

    void grow(BlockId b);
    void add_candidate_for(BlockId b);
    bool better(const Candidate& x, const Candidate& y) const;
    void normalize_queue();
    void rebuild_queue();
    bool blocked(BlockId b);
    void mark_processed(BlockId b, Slot slot, bool real);
    void consider_tip(BlockId b, Slot slot);
    void park_current();
    Partial take_partial(BlockId b);
    void check_p2(Slot slot);
    void emit(const TraceEvent& e);

    NodeConfig cfg_;
    NodeContext ctx_;
    std::vector<std::uint8_t> flags_;
    std::vector<std::uint64_t> seen_;
    std::vector<Candidate> queue_;
    std::vector<BlockId> frontier_;  // known, unprocessed, parent processed
    std::vector<Partial> cache_;     // most recently used last
    Partial current_;
    BlockId dtip_ = kGenesis;
    BlockId confirmed_tip_ = kGenesis;
    NodeStats stats_;
    bool idle_ = true;
    bool dirty_ = true;
};

}  // namespace nakasim
