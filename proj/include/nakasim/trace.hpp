#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nakasim/types.hpp"

namespace nakasim {

enum class EventKind : std::uint8_t {
    Bpo,
    BlockProduced,
    HeaderDelivered,
    ContentUploaded,
    ContentFetched,
    PretendEmpty,
    ChainSwitched,
    EquivocationSeen,
    ProofIncluded,
    Blanked,
    AdversaryRelease,
    LeadSample,
    LedgerOutput,
};

const char* kind_name(EventKind k);
bool kind_from_name(const std::string& s, EventKind& out);

// Compact record; field meaning depends on kind (see field names in trace.cpp).
//   Bpo              node, seq, honest
//   BlockProduced    block, parent, node, bpo_slot, bpo_seq, honest, height
//   HeaderDelivered  node, block
//   ContentUploaded  block
//   ContentFetched   node, block, credit
//   PretendEmpty     node, block
//   ChainSwitched    node, old_tip, new_tip, height
//   EquivocationSeen node, block, other
//   ProofIncluded    block, target, depth
//   Blanked          node, block
//   AdversaryRelease tip, headers, content_block
//   LeadSample       lead
//   LedgerOutput     node, tip, length
struct TraceEvent {
    Slot slot = 0;
    EventKind kind = EventKind::Bpo;
    bool flag = false;
    std::int64_t a = -1, b = -1, c = -1, d = -1, e = -1;
    double x = 0.0;

    bool operator==(const TraceEvent& o) const
    {
        return slot == o.slot && kind == o.kind && flag == o.flag && a == o.a && b == o.b && c == o.c &&
               d == o.d && e == o.e && x == o.x;
    }
};

struct RunInfo {
    SimParams params;
    std::uint32_t honest_nodes = 0;
    std::string protocol = "PoW";
    std::string policy = "LongestHeaderChain";
    std::string attack = "None";
    std::int64_t k_conf = 0;
    std::int64_t k_epf = 0;
    Slot excluded_until = -1;  // partition scenarios: audits skip slots before this
};

struct Trace {
    RunInfo info;
    std::vector<TraceEvent> events;
    bool record_deliveries = true;

    void push(const TraceEvent& e) { events.push_back(e); }
};

// JSONL: first line RunInfo, then one event per line.
std::string event_to_json(const TraceEvent& e);
TraceEvent event_from_json(const std::string& line);
void write_trace(std::ostream& os, const Trace& t);
Trace read_trace(std::istream& is);
std::string run_info_to_json(const RunInfo& info);
RunInfo run_info_from_json(const std::string& line);

}  // namespace nakasim
