#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nakasim/block_store.hpp"
#include "nakasim/trace.hpp"

namespace nakasim {

enum class SlotClass : std::uint8_t { Empty, Good, Bad };

// Dense form, one entry per slot.
std::vector<SlotClass> classify_slots(const std::vector<std::uint32_t>& h, const std::vector<std::uint32_t>& a,
                                      std::int64_t nu);

using Bits = std::vector<std::uint8_t>;

// Indices are 0-based here: interval (i, j] of the usual notation is the
// half-open range [i, j) and contains k iff i <= k < j. Intervals are
// clipped to the sequence, so edge indices only see truncated intervals.
bool is_pp_interval(std::size_t k, const Bits& g);
Bits pp_set_interval(const Bits& g);
bool is_pp_walk(std::size_t k, const Bits& g);
Bits pp_set_walk(const Bits& g);  // O(n) over all k
inline Bits cp_set(const Bits& d) { return pp_set_walk(d); }

// P(i,j] > 0 implies X(i,j] >= P(i,j].
bool margin_check(const Bits& g, const Bits& p, std::size_t i, std::size_t j);
// Y(i,j] <= 0 implies N >= D and G - D >= (G - B) / 2.
bool not_cp_interval_check(const Bits& g, const Bits& d, std::size_t i, std::size_t j);

// Everything the audits need, rebuilt from a trace.
struct TraceView {
    RunInfo info;
    Slot last_slot = -1;
    BlockStore store;
    struct Busy {
        Slot slot;
        std::uint32_t h, a;
    };
    std::vector<Busy> busy;  // non-empty slots in order
    std::vector<BlockId> honest_block_at;  // parallel to busy: the honest block when h == 1
    struct Fetch {
        Slot slot;
        BlockId block;
        double credit;
    };
    std::vector<std::vector<Fetch>> fetches;  // per honest node
    std::vector<std::vector<std::pair<Slot, BlockId>>> tips;  // per node, last tip per slot
    std::vector<std::vector<Slot>> processed_at;  // per node, per block; max() if never
    std::vector<std::pair<Slot, std::uint32_t>> lmin;  // change points of L_min, end-of-slot values

    std::uint32_t lmin_at(Slot t) const;  // L_min at the end of slot t, 0 before any change
    BlockId tip_at(NodeId n, Slot t) const;
};

inline constexpr Slot kNever = std::numeric_limits<Slot>::max();

TraceView build_view(const Trace& t);

struct IndexSeries {
    std::vector<Slot> t;
    Bits g, d;
    std::vector<BlockId> block;  // honest block of good indices, kNoBlock otherwise
    std::size_t size() const { return t.size(); }
};

IndexSeries index_series(const TraceView& v, std::int64_t nu);

enum class Verdict { Pass, Fail, Inconclusive };
const char* verdict_name(Verdict v);

struct AuditResult {
    std::string name;
    Verdict verdict = Verdict::Pass;
    std::uint64_t checked = 0;
    std::uint64_t violations = 0;
    std::string witness;  // first violation
};

AuditResult audit_chain_growth(const TraceView& v, const IndexSeries& s, std::int64_t nu);
AuditResult audit_chain_growth_interval(const TraceView& v, const IndexSeries& s, std::int64_t nu);
AuditResult audit_stabilization(const TraceView& v, const IndexSeries& s, const Bits& cp, std::int64_t nu);
AuditResult audit_budget(const TraceView& v, const IndexSeries& s, const Bits& cp, std::int64_t nu, double c_tilde);
AuditResult audit_capacity(const TraceView& v);
AuditResult audit_p1(const TraceView& v);
AuditResult audit_prefix(const TraceView& v);

struct CpRecurrence {
    std::int64_t k_cp = 0;
    std::uint64_t fixed_windows = 0, fixed_pass = 0;
    std::uint64_t sliding_windows = 0, sliding_pass = 0;
    double fixed_fraction() const { return fixed_windows ? double(fixed_pass) / fixed_windows : 1.0; }
    double sliding_fraction() const { return sliding_windows ? double(sliding_pass) / sliding_windows : 1.0; }
};

// Windows closer than `margin` indices to either end are skipped.
CpRecurrence cp_recurrence(const Bits& cp, std::int64_t k_cp, std::size_t margin);

struct PivotReport {
    IndexSeries series;
    Bits pp, cp;
    std::vector<AuditResult> audits;
    CpRecurrence recurrence;
    bool all_pass() const;
};

PivotReport analyze_trace(const Trace& t, std::int64_t nu, double c_tilde, std::int64_t k_cp);
std::string report_to_json(const PivotReport& r);
void write_index_csv(std::ostream& os, const PivotReport& r);

// Negative controls: each returns a copy of the trace broken in one way.
Trace doctor_abandon(const Trace& t, NodeId node);               // node falls back to genesis at the end
Trace doctor_double_fetch(const Trace& t, NodeId node);          // one block fetched twice
Trace doctor_burst(const Trace& t, NodeId node, int extra);      // extra fetches in one slot
Trace doctor_stall(const Trace& t, NodeId node);                 // node's dChain never moves
Trace doctor_skip_parent(const Trace& t, NodeId node);           // a child fetched before its parent
Trace doctor_idle_window(const Trace& t, NodeId node, std::int64_t nu);  // drops a good block's fetches

}  // namespace nakasim
