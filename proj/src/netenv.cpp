#include "nakasim/netenv.hpp"

#include <algorithm>

namespace nakasim {

namespace {
constexpr double kEps = 1e-9;
}

UploadResult ContentCloud::upload(std::uint64_t commitment, const BlockContent& content)
{
    if (content_commitment(content) != commitment)
        return UploadResult::CommitmentMismatch;
    return store_.emplace(commitment, content).second ? UploadResult::Stored : UploadResult::AlreadyPresent;
}

const BlockContent* ContentCloud::get(std::uint64_t commitment) const
{
    auto it = store_.find(commitment);
    return it == store_.end() ? nullptr : &it->second;
}

void CapacityMeter::refill()
{
    budget_ = std::min(budget_, carry_cap_) + per_slot_;
}

double CapacityMeter::spend(double want)
{
    double s = std::min(want, budget_);
    if (s < 0.0)
        s = 0.0;
    budget_ -= s;
    if (budget_ < kEps)
        budget_ = 0.0;
    return s;
}

Environment::Environment(const SimParams& params, std::uint32_t honest_nodes, const BlockStore& store)
    : store_(store),
      honest_(honest_nodes),
      delay_(params.header_delay_slots()),
      meters_(honest_nodes, CapacityMeter(params.capacity * params.tau, 1.0))
{
}

void Environment::enqueue(BlockId header, NodeId lo, NodeId hi, Slot slot, Slot due)
{
    if (lo >= hi)
        return;
    queue_[due].push_back({header, lo, hi, slot, due});
}

bool Environment::broadcast_header(BlockId header, NodeId origin, Slot slot)
{
    if (broadcast_.size() <= header)
        broadcast_.resize(std::max<std::size_t>(header + 1, broadcast_.size() * 2), 0);
    if (broadcast_[header])
        return false;
    broadcast_[header] = 1;
    Slot due = slot + delay_;
    if (partition_active(slot) && origin < honest_) {
        Slot heal = std::max(due, part_end_);
        if (origin < part_split_) {
            enqueue(header, 0, part_split_, slot, due);
            enqueue(header, part_split_, honest_, slot, heal);
        } else {
            enqueue(header, 0, part_split_, slot, heal);
            enqueue(header, part_split_, honest_, slot, due);
        }
    } else {
        enqueue(header, 0, honest_, slot, due);
    }
    return true;
}

std::vector<HeaderQueueEntry> Environment::take_due(Slot slot)
{
    std::vector<HeaderQueueEntry> out;
    while (!queue_.empty() && queue_.begin()->first <= slot) {
        auto& v = queue_.begin()->second;
        out.insert(out.end(), v.begin(), v.end());
        queue_.erase(queue_.begin());
    }
    return out;
}

Slot Environment::next_due() const
{
    return queue_.empty() ? -1 : queue_.begin()->first;
}

UploadResult Environment::upload_content(BlockId header, const BlockContent& content)
{
    return cloud_.upload(store_.header(header).commitment, content);
}

bool Environment::content_available(BlockId header) const
{
    return header == kGenesis || cloud_.has(store_.header(header).commitment);
}

void Environment::begin_slot()
{
    for (auto& m : meters_)
        m.refill();
}

FetchResult Environment::request_content(NodeId node, BlockId header, double& progress)
{
    FetchResult r;
    if (!content_available(header)) {
        r.outcome = FetchOutcome::Unavailable;
        return r;
    }
    CapacityMeter& m = meters_[node];
    double need = 1.0 - progress;
    if (m.budget() + kEps >= need) {
        r.spent = m.spend(need);
        progress = 1.0;
        r.outcome = FetchOutcome::Fetched;
        return r;
    }
    r.spent = m.spend(m.budget());
    progress += r.spent;
    r.outcome = FetchOutcome::Throttled;
    return r;
}

void Environment::set_partition(Slot start, Slot end, NodeId split)
{
    part_start_ = start;
    part_end_ = end;
    part_split_ = split;
}

}  // namespace nakasim
