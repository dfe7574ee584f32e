#include "nakasim/pivots.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace nakasim {

std::vector<SlotClass> classify_slots(const std::vector<std::uint32_t>& h, const std::vector<std::uint32_t>& a,
                                      std::int64_t nu)
{
    std::size_t n = h.size();
    std::vector<SlotClass> out(n, SlotClass::Empty);
    // next_busy[t]: first non-empty slot after t
    std::vector<std::size_t> next_busy(n + 1, n);
    for (std::size_t t = n; t-- > 0;)
        next_busy[t] = (t + 1 < n && h[t + 1] + a[t + 1] > 0) ? t + 1 : (t + 1 < n ? next_busy[t + 1] : n);
    for (std::size_t t = 0; t < n; ++t) {
        if (h[t] + a[t] == 0)
            continue;
        bool quiet_after = next_busy[t] == n || static_cast<std::int64_t>(next_busy[t] - t) > nu;
        out[t] = (h[t] == 1 && a[t] == 0 && quiet_after) ? SlotClass::Good : SlotClass::Bad;
    }
    return out;
}

namespace {

std::vector<std::int64_t> walk_prefix(const Bits& g)
{
    std::vector<std::int64_t> s(g.size() + 1, 0);
    for (std::size_t i = 0; i < g.size(); ++i)
        s[i + 1] = s[i] + (g[i] ? 1 : -1);
    return s;
}

}  // namespace

bool is_pp_interval(std::size_t k, const Bits& g)
{
    auto s = walk_prefix(g);
    for (std::size_t i = 0; i <= k; ++i)
        for (std::size_t j = k + 1; j <= g.size(); ++j)
            if (s[j] - s[i] <= 0)
                return false;
    return true;
}

Bits pp_set_interval(const Bits& g)
{
    Bits out(g.size(), 0);
    for (std::size_t k = 0; k < g.size(); ++k)
        out[k] = is_pp_interval(k, g);
    return out;
}

bool is_pp_walk(std::size_t k, const Bits& g)
{
    if (!g[k])
        return false;
    std::int64_t run = 0;
    for (std::size_t j = k + 1; j < g.size(); ++j) {
        run += g[j] ? 1 : -1;
        if (run < 0)
            return false;
    }
    run = 0;
    for (std::size_t i = k; i-- > 0;) {
        run += g[i] ? 1 : -1;
        if (run < 0)
            return false;
    }
    return true;
}

Bits pp_set_walk(const Bits& g)
{
    std::size_t n = g.size();
    auto s = walk_prefix(g);
    // suffix_min[j] = min over m >= j of s[m]
    std::vector<std::int64_t> suffix_min(n + 2, 0);
    suffix_min[n] = s[n];
    for (std::size_t j = n; j-- > 0;)
        suffix_min[j] = std::min(s[j], suffix_min[j + 1]);
    Bits out(n, 0);
    std::int64_t prefix_max = s[0];
    for (std::size_t k = 0; k < n; ++k) {
        prefix_max = std::max(prefix_max, s[k]);
        out[k] = g[k] && suffix_min[k + 1] >= s[k + 1] && prefix_max <= s[k];
    }
    return out;
}

bool margin_check(const Bits& g, const Bits& p, std::size_t i, std::size_t j)
{
    std::int64_t x = 0, pc = 0;
    for (std::size_t m = i; m < j; ++m) {
        x += g[m] ? 1 : -1;
        pc += p[m] ? 1 : 0;
    }
    return pc == 0 || x >= pc;
}

bool not_cp_interval_check(const Bits& g, const Bits& d, std::size_t i, std::size_t j)
{
    std::int64_t G = 0, B = 0, D = 0, N = 0;
    for (std::size_t m = i; m < j; ++m) {
        (g[m] ? G : B) += 1;
        (d[m] ? D : N) += 1;
    }
    if (D - N > 0)
        return true;
    return N >= D && 2 * (G - D) >= G - B;
}

// ---- trace view ----

std::uint32_t TraceView::lmin_at(Slot t) const
{
    auto it = std::upper_bound(lmin.begin(), lmin.end(), t,
                               [](Slot s, const std::pair<Slot, std::uint32_t>& p) { return s < p.first; });
    return it == lmin.begin() ? 0 : std::prev(it)->second;
}

BlockId TraceView::tip_at(NodeId n, Slot t) const
{
    const auto& tl = tips[n];
    auto it = std::upper_bound(tl.begin(), tl.end(), t,
                               [](Slot s, const std::pair<Slot, BlockId>& p) { return s < p.first; });
    return it == tl.begin() ? kGenesis : std::prev(it)->second;
}

TraceView build_view(const Trace& t)
{
    TraceView v;
    v.info = t.info;
    std::uint32_t n = t.info.honest_nodes;
    v.fetches.resize(n);
    v.tips.resize(n);
    v.processed_at.resize(n);
    std::unordered_map<Slot, BlockId> honest_by_slot;
    std::vector<std::uint32_t> height(n, 0);
    std::map<std::uint32_t, std::uint32_t> height_count;
    if (n > 0)
        height_count[0] = n;

    auto mark = [&](std::int64_t node, std::int64_t b, Slot slot) {
        if (node < 0 || node >= static_cast<std::int64_t>(n))
            return;
        auto& pa = v.processed_at[node];
        if (pa.size() <= static_cast<std::size_t>(b))
            pa.resize(v.store.size() + 1024, kNever);
        if (pa[b] == kNever)
            pa[b] = slot;
    };

    for (const auto& e : t.events) {
        v.last_slot = std::max(v.last_slot, e.slot);
        switch (e.kind) {
        case EventKind::Bpo:
            if (v.busy.empty() || v.busy.back().slot != e.slot)
                v.busy.push_back({e.slot, 0, 0});
            (e.flag ? v.busy.back().h : v.busy.back().a) += 1;
            break;
        case EventKind::BlockProduced: {
            BpoId bpo{e.d, static_cast<NodeId>(e.c), e.flag, static_cast<std::uint32_t>(e.e)};
            v.store.replay(static_cast<BlockId>(e.a), bpo, static_cast<BlockId>(e.b), 0);
            if (e.flag) {
                honest_by_slot.emplace(e.d, static_cast<BlockId>(e.a));
                mark(e.c, e.a, e.slot);
            }
            break;
        }
        case EventKind::ContentFetched:
            if (e.a >= 0 && e.a < static_cast<std::int64_t>(n))
                v.fetches[e.a].push_back({e.slot, static_cast<BlockId>(e.b), e.x});
            mark(e.a, e.b, e.slot);
            break;
        case EventKind::PretendEmpty:
            mark(e.a, e.b, e.slot);
            break;
        case EventKind::ChainSwitched: {
            if (e.a < 0 || e.a >= static_cast<std::int64_t>(n))
                break;
            auto& tl = v.tips[e.a];
            if (!tl.empty() && tl.back().first == e.slot)
                tl.back().second = static_cast<BlockId>(e.c);
            else
                tl.emplace_back(e.slot, static_cast<BlockId>(e.c));
            std::uint32_t& h = height[e.a];
            auto newh = static_cast<std::uint32_t>(e.d);
            if (newh != h) {
                if (--height_count[h] == 0)
                    height_count.erase(h);
                ++height_count[newh];
                h = newh;
                std::uint32_t m = height_count.begin()->first;
                if (!v.lmin.empty() && v.lmin.back().first == e.slot)
                    v.lmin.back().second = m;
                else if (v.lmin.empty() ? m != 0 : v.lmin.back().second != m)
                    v.lmin.emplace_back(e.slot, m);
            }
            break;
        }
        default: break;
        }
    }
    for (auto& pa : v.processed_at)
        pa.resize(v.store.size(), kNever);
    v.honest_block_at.resize(v.busy.size(), kNoBlock);
    for (std::size_t i = 0; i < v.busy.size(); ++i) {
        if (v.busy[i].h != 1)
            continue;
        auto it = honest_by_slot.find(v.busy[i].slot);
        if (it != honest_by_slot.end())
            v.honest_block_at[i] = it->second;
    }
    return v;
}

IndexSeries index_series(const TraceView& v, std::int64_t nu)
{
    IndexSeries s;
    std::size_t n = v.busy.size();
    s.t.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& b = v.busy[i];
        bool quiet_after = i + 1 == n || v.busy[i + 1].slot - b.slot > nu;
        bool good = b.h == 1 && b.a == 0 && quiet_after;
        BlockId blk = good ? v.honest_block_at[i] : kNoBlock;
        bool down = good && blk != kNoBlock;
        if (down)
            for (const auto& pa : v.processed_at)
                if (pa[blk] > b.slot + nu) {
                    down = false;
                    break;
                }
        s.t.push_back(b.slot);
        s.g.push_back(good);
        s.d.push_back(down);
        s.block.push_back(blk);
    }
    return s;
}

const char* verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
    }
    return "pass";
}

namespace {

void violate(AuditResult& r, const std::string& what)
{
    if (r.violations++ == 0)
        r.witness = what;
    r.verdict = Verdict::Fail;
}

bool audited(const TraceView& v, Slot t, std::int64_t nu)
{
    return t >= v.info.excluded_until && t + nu <= v.last_slot;
}

}  // namespace

AuditResult audit_chain_growth(const TraceView& v, const IndexSeries& s, std::int64_t nu)
{
    AuditResult r;
    r.name = "chain_growth";
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (!s.d[k] || !audited(v, s.t[k], nu))
            continue;
        ++r.checked;
        std::uint32_t before = v.lmin_at(s.t[k] - 1), after = v.lmin_at(s.t[k] + nu);
        if (after < before + 1)
            violate(r, "index " + std::to_string(k + 1) + " slot " + std::to_string(s.t[k]) + ": L_min " +
                           std::to_string(before) + " -> " + std::to_string(after));
    }
    return r;
}

AuditResult audit_chain_growth_interval(const TraceView& v, const IndexSeries& s, std::int64_t nu)
{
    AuditResult r;
    r.name = "chain_growth_interval";
    // for a <= b: L(t_b + nu) - Dp[b+1] >= L(t_a - 1) - Dp[a]
    std::int64_t dp = 0, best = std::numeric_limits<std::int64_t>::min();
    std::size_t best_a = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (!audited(v, s.t[k], nu)) {
            if (s.t[k] < v.info.excluded_until) {
                best = std::numeric_limits<std::int64_t>::min();
                dp = 0;
            }
            continue;
        }
        std::int64_t left = static_cast<std::int64_t>(v.lmin_at(s.t[k] - 1)) - dp;
        if (left > best) {
            best = left;
            best_a = k;
        }
        dp += s.d[k];
        std::int64_t right = static_cast<std::int64_t>(v.lmin_at(s.t[k] + nu)) - dp;
        ++r.checked;
        if (right < best)
            violate(r, "interval of indices " + std::to_string(best_a + 1) + ".." + std::to_string(k + 1));
    }
    return r;
}

AuditResult audit_stabilization(const TraceView& v, const IndexSeries& s, const Bits& cp, std::int64_t nu)
{
    AuditResult r;
    r.name = "stabilization";
    std::size_t n = v.tips.size();
    // suffix lca of each node's tip timeline, with genesis in effect before the first switch
    std::vector<std::vector<BlockId>> suffix(n);
    for (std::size_t p = 0; p < n; ++p) {
        const auto& tl = v.tips[p];
        auto& sl = suffix[p];
        sl.assign(tl.size(), kGenesis);
        for (std::size_t i = tl.size(); i-- > 0;)
            sl[i] = i + 1 == tl.size() ? tl[i].second : v.store.lca(tl[i].second, sl[i + 1]);
    }
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (!cp[k] || !audited(v, s.t[k], nu) || s.block[k] == kNoBlock)
            continue;
        BlockId b = s.block[k];
        Slot from = s.t[k] + nu;
        for (std::size_t p = 0; p < n; ++p) {
            ++r.checked;
            const auto& tl = v.tips[p];
            auto it = std::upper_bound(tl.begin(), tl.end(), from,
                                       [](Slot x, const std::pair<Slot, BlockId>& e) { return x < e.first; });
            if (it == tl.begin()) {
                if (b != kGenesis)
                    violate(r, "node " + std::to_string(p) + " still on genesis at slot " + std::to_string(from));
                continue;
            }
            std::size_t i = static_cast<std::size_t>(std::prev(it) - tl.begin());
            if (v.store.is_ancestor(b, suffix[p][i]))
                continue;
            std::size_t j = i;
            while (j < tl.size() && v.store.is_ancestor(b, tl[j].second))
                ++j;
            Slot at = j < tl.size() ? tl[j].first : from;
            violate(r, "node " + std::to_string(p) + " drops block " + std::to_string(b) + " of index " +
                           std::to_string(k + 1) + " at slot " + std::to_string(at));
        }
    }
    return r;
}

AuditResult audit_budget(const TraceView& v, const IndexSeries& s, const Bits& cp, std::int64_t nu, double c_tilde)
{
    AuditResult r;
    r.name = "budget";
    if (c_tilde < 1.0) {
        r.verdict = Verdict::Inconclusive;
        r.witness = "c_tilde below one block";
        return r;
    }
    Slot last_cp_slot = -1;
    for (std::size_t k = 0; k < s.size(); ++k) {
        bool check = s.g[k] && !s.d[k] && audited(v, s.t[k], nu) && s.block[k] != kNoBlock;
        if (check) {
            BlockId b = s.block[k];
            Slot lo = s.t[k], hi = s.t[k] + nu;
            for (std::size_t p = 0; p < v.fetches.size(); ++p) {
                if (v.processed_at[p][b] <= hi)
                    continue;
                ++r.checked;
                const auto& f = v.fetches[p];
                auto it = std::lower_bound(f.begin(), f.end(), lo,
                                           [](const TraceView::Fetch& x, Slot t) { return x.slot < t; });
                std::uint64_t count = 0;
                for (; it != f.end() && it->slot <= hi; ++it) {
                    Slot bs = v.store.header(it->block).bpo.slot;
                    if (bs > last_cp_slot && bs <= s.t[k])
                        ++count;
                }
                if (static_cast<double>(count) + 1e-9 < c_tilde - 1.0)
                    violate(r, "node " + std::to_string(p) + " fetched " + std::to_string(count) +
                                   " qualifying blocks while index " + std::to_string(k + 1) + " waited");
            }
        }
        if (cp[k] && s.t[k] >= v.info.excluded_until)
            last_cp_slot = s.t[k];
    }
    return r;
}

AuditResult audit_capacity(const TraceView& v)
{
    AuditResult r;
    r.name = "capacity";
    double per_slot = v.info.params.capacity * v.info.params.tau;
    for (std::size_t p = 0; p < v.fetches.size(); ++p) {
        const auto& f = v.fetches[p];
        double carry = 0.0, best = 0.0;  // Kadane over sum(paid) - per_slot * window
        Slot prev = -1;
        std::size_t i = 0;
        while (i < f.size()) {
            Slot t = f[i].slot;
            double paid = 0.0;
            for (; i < f.size() && f[i].slot == t; ++i)
                paid += 1.0 - f[i].credit;
            if (prev >= 0)
                carry = std::max(0.0, carry - static_cast<double>(t - prev - 1) * per_slot);
            double cur = paid - per_slot + carry;
            best = std::max(best, cur);
            carry = std::max(0.0, cur);
            prev = t;
        }
        ++r.checked;
        if (best > 1.0 + 1e-6)
            violate(r, "node " + std::to_string(p) + " exceeds its budget by " + std::to_string(best) + " blocks");
    }
    return r;
}

AuditResult audit_p1(const TraceView& v)
{
    AuditResult r;
    r.name = "p1";
    for (std::size_t p = 0; p < v.fetches.size(); ++p) {
        std::unordered_set<BpoId, BpoHash> seen;
        for (const auto& f : v.fetches[p]) {
            ++r.checked;
            if (!seen.insert(v.store.header(f.block).bpo).second)
                violate(r, "node " + std::to_string(p) + " fetched a second block for the BPO of " +
                               std::to_string(f.block) + " at slot " + std::to_string(f.slot));
        }
    }
    // plain PoS does not promise one fetch per BPO
    if (r.verdict == Verdict::Fail && v.info.protocol == "PoS")
        r.verdict = Verdict::Inconclusive;
    return r;
}

AuditResult audit_prefix(const TraceView& v)
{
    AuditResult r;
    r.name = "prefix";
    for (std::size_t p = 0; p < v.fetches.size(); ++p) {
        for (const auto& f : v.fetches[p]) {
            ++r.checked;
            if (f.block == kGenesis || f.block >= v.store.size())
                continue;
            BlockId parent = v.store.parent(f.block);
            if (parent != kGenesis && v.processed_at[p][parent] > f.slot)
                violate(r, "node " + std::to_string(p) + " fetched " + std::to_string(f.block) + " at slot " +
                               std::to_string(f.slot) + " before its parent");
        }
    }
    return r;
}

CpRecurrence cp_recurrence(const Bits& cp, std::int64_t k_cp, std::size_t margin)
{
    CpRecurrence r;
    r.k_cp = k_cp;
    if (k_cp <= 0)
        return r;
    auto K = static_cast<std::size_t>(k_cp);
    std::size_t n = cp.size();
    std::vector<std::size_t> pre(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i)
        pre[i + 1] = pre[i] + cp[i];
    if (n < 2 * margin)
        return r;
    std::size_t lo = margin, hi = n - margin;
    for (std::size_t s = 0; s + K <= n; s += K) {
        if (s < lo || s + K > hi)
            continue;
        ++r.fixed_windows;
        r.fixed_pass += pre[s + K] > pre[s];
    }
    for (std::size_t s = lo; s + 2 * K <= hi; ++s) {
        ++r.sliding_windows;
        r.sliding_pass += pre[s + 2 * K] > pre[s];
    }
    return r;
}

bool PivotReport::all_pass() const
{
    for (const auto& a : audits)
        if (a.verdict == Verdict::Fail)
            return false;
    return true;
}

PivotReport analyze_trace(const Trace& t, std::int64_t nu, double c_tilde, std::int64_t k_cp)
{
    TraceView v = build_view(t);
    PivotReport r;
    r.series = index_series(v, nu);
    r.pp = pp_set_walk(r.series.g);
    r.cp = cp_set(r.series.d);
    r.audits.push_back(audit_chain_growth(v, r.series, nu));
    r.audits.push_back(audit_chain_growth_interval(v, r.series, nu));
    r.audits.push_back(audit_stabilization(v, r.series, r.cp, nu));
    r.audits.push_back(audit_budget(v, r.series, r.cp, nu, c_tilde));
    r.audits.push_back(audit_capacity(v));
    r.audits.push_back(audit_p1(v));
    r.audits.push_back(audit_prefix(v));
    r.recurrence = cp_recurrence(r.cp, k_cp, static_cast<std::size_t>(std::max<std::int64_t>(k_cp, 0)));
    return r;
}

std::string report_to_json(const PivotReport& r)
{
    using nlohmann::json;
    json j;
    std::size_t g = 0, d = 0, pp = 0, cp = 0;
    for (std::size_t k = 0; k < r.series.size(); ++k) {
        g += r.series.g[k];
        d += r.series.d[k];
        pp += r.pp[k];
        cp += r.cp[k];
    }
    j["indices"] = r.series.size();
    j["good"] = g;
    j["downloaded"] = d;
    j["pp"] = pp;
    j["cp"] = cp;
    json audits = json::array();
    for (const auto& a : r.audits)
        audits.push_back({{"name", a.name},
                          {"verdict", verdict_name(a.verdict)},
                          {"checked", a.checked},
                          {"violations", a.violations},
                          {"witness", a.witness}});
    j["audits"] = audits;
    const auto& rc = r.recurrence;
    j["cp_recurrence"] = {{"k_cp", rc.k_cp},
                          {"fixed_windows", rc.fixed_windows},
                          {"fixed_fraction", rc.fixed_fraction()},
                          {"sliding_windows", rc.sliding_windows},
                          {"sliding_fraction", rc.sliding_fraction()}};
    j["all_pass"] = r.all_pass();
    return j.dump(2);
}

void write_index_csv(std::ostream& os, const PivotReport& r)
{
    os << "k,t_k,G,D,X_prefix,Y_prefix,PP,CP\n";
    std::int64_t x = 0, y = 0;
    for (std::size_t k = 0; k < r.series.size(); ++k) {
        x += r.series.g[k] ? 1 : -1;
        y += r.series.d[k] ? 1 : -1;
        os << k + 1 << ',' << r.series.t[k] << ',' << int(r.series.g[k]) << ',' << int(r.series.d[k]) << ',' << x
           << ',' << y << ',' << int(r.pp[k]) << ',' << int(r.cp[k]) << '\n';
    }
}

// ---- negative controls ----

Trace doctor_abandon(const Trace& t, NodeId node)
{
    Trace out = t;
    Slot last = 0;
    BlockId tip = kGenesis;
    for (const auto& e : t.events) {
        last = std::max(last, e.slot);
        if (e.kind == EventKind::ChainSwitched && e.a == node)
            tip = static_cast<BlockId>(e.c);
    }
    out.events.push_back({last, EventKind::ChainSwitched, false, node, tip, kGenesis, 0});
    return out;
}

Trace doctor_double_fetch(const Trace& t, NodeId node)
{
    Trace out = t;
    auto& ev = out.events;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (ev[i].kind == EventKind::ContentFetched && ev[i].a == node) {
            TraceEvent dup = ev[i];
            dup.x = 1.0;  // free, so only the one-fetch rule notices
            ev.insert(ev.begin() + static_cast<std::ptrdiff_t>(i) + 1, dup);
            break;
        }
    }
    return out;
}

Trace doctor_burst(const Trace& t, NodeId node, int extra)
{
    Trace out = t;
    auto& ev = out.events;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (ev[i].kind == EventKind::ContentFetched && ev[i].a == node) {
            TraceEvent e = ev[i];
            e.x = 0.0;
            e.b = kGenesis;
            ev.insert(ev.begin() + static_cast<std::ptrdiff_t>(i) + 1, static_cast<std::size_t>(extra), e);
            break;
        }
    }
    return out;
}

Trace doctor_stall(const Trace& t, NodeId node)
{
    Trace out = t;
    auto& ev = out.events;
    ev.erase(std::remove_if(ev.begin(), ev.end(),
                            [&](const TraceEvent& e) { return e.kind == EventKind::ChainSwitched && e.a == node; }),
             ev.end());
    return out;
}

Trace doctor_skip_parent(const Trace& t, NodeId node)
{
    Trace out = t;
    auto& ev = out.events;
    std::unordered_map<BlockId, BlockId> parent;
    std::unordered_map<BlockId, std::size_t> fetch_pos;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        const auto& e = ev[i];
        if (e.kind == EventKind::BlockProduced)
            parent[static_cast<BlockId>(e.a)] = static_cast<BlockId>(e.b);
        if (e.kind == EventKind::ContentFetched && e.a == node) {
            auto b = static_cast<BlockId>(e.b);
            auto it = fetch_pos.find(parent[b]);
            if (it != fetch_pos.end()) {
                ev.erase(ev.begin() + static_cast<std::ptrdiff_t>(it->second));
                return out;
            }
            fetch_pos[b] = i;
        }
    }
    return out;
}

Trace doctor_idle_window(const Trace& t, NodeId node, std::int64_t nu)
{
    Trace out = t;
    TraceView v = build_view(t);
    IndexSeries s = index_series(v, nu);
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (!s.d[k] || s.block[k] == kNoBlock || s.t[k] + nu > v.last_slot)
            continue;
        if (v.store.header(s.block[k]).bpo.node == node)
            continue;
        Slot lo = s.t[k], hi = s.t[k] + nu;
        auto& ev = out.events;
        ev.erase(std::remove_if(ev.begin(), ev.end(),
                                [&](const TraceEvent& e) {
                                    return (e.kind == EventKind::ContentFetched || e.kind == EventKind::PretendEmpty) &&
                                           e.a == node && e.slot >= lo && e.slot <= hi;
                                }),
                 ev.end());
        return out;
    }
    return out;
}

}  // namespace nakasim
