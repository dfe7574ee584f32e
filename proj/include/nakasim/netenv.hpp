#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "nakasim/block_store.hpp"
#include "nakasim/types.hpp"

namespace nakasim {

enum class UploadResult { Stored, AlreadyPresent, CommitmentMismatch };
enum class FetchOutcome { Fetched, Unavailable, Throttled };

class ContentCloud {
public:
    UploadResult upload(std::uint64_t commitment, const BlockContent& content);
    bool has(std::uint64_t commitment) const { return store_.count(commitment) != 0; }
    const BlockContent* get(std::uint64_t commitment) const;
    std::size_t size() const { return store_.size(); }

private:
    std::unordered_map<std::uint64_t, BlockContent> store_;
};

// Token bucket: refill per slot, leftover carried over up to `carry_cap`.
class CapacityMeter {
public:
    CapacityMeter(double per_slot = 1.0, double carry_cap = 1.0) : per_slot_(per_slot), carry_cap_(carry_cap) {}

    void refill();
    double budget() const { return budget_; }
    double per_slot() const { return per_slot_; }
    // Spends min(want, budget) and returns the amount spent.
    double spend(double want);

private:
    double per_slot_;
    double carry_cap_;
    double budget_ = 0.0;
};

struct HeaderQueueEntry {
    BlockId header = kNoBlock;
    NodeId target_lo = 0;  // targets are the node range [lo, hi)
    NodeId target_hi = 0;
    Slot enqueue_slot = 0;
    Slot forced_delivery_slot = 0;
};

struct FetchResult {
    FetchOutcome outcome = FetchOutcome::Throttled;
    double spent = 0.0;
};

class Environment {
public:
    Environment(const SimParams& params, std::uint32_t honest_nodes, const BlockStore& store);

    // Every node gets the header by the deadline; duplicates are ignored.
    // Returns false when the header had already been broadcast.
    bool broadcast_header(BlockId header, NodeId origin, Slot slot);
    // Deliveries due at `slot`, in enqueue order.
    std::vector<HeaderQueueEntry> take_due(Slot slot);
    bool has_pending() const { return !queue_.empty(); }
    Slot next_due() const;

    UploadResult upload_content(BlockId header, const BlockContent& content);
    bool content_available(BlockId header) const;
    const ContentCloud& cloud() const { return cloud_; }

    void begin_slot();
    // progress: fraction already paid for this header, updated in place.
    FetchResult request_content(NodeId node, BlockId header, double& progress);
    const CapacityMeter& meter(NodeId node) const { return meters_[node]; }

    // Partition override: between [start, end) deliveries that cross the
    // split at node `split` are held back until `end`.
    void set_partition(Slot start, Slot end, NodeId split);
    bool partition_active(Slot slot) const { return slot >= part_start_ && slot < part_end_; }

    std::int64_t delay_slots() const { return delay_; }

private:
    void enqueue(BlockId header, NodeId lo, NodeId hi, Slot slot, Slot due);

    const BlockStore& store_;
    std::uint32_t honest_;
    std::int64_t delay_;
    ContentCloud cloud_;
    std::vector<CapacityMeter> meters_;
    std::vector<std::uint8_t> broadcast_;
    std::map<Slot, std::vector<HeaderQueueEntry>> queue_;
    Slot part_start_ = 0, part_end_ = 0;
    NodeId part_split_ = 0;
};

}  // namespace nakasim
