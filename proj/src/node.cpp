#include "nakasim/node.hpp"

#include <algorithm>

namespace nakasim {

std::string SchedulingPolicy::name() const
{
    std::string base = kind == PolicyKind::Greedy          ? "Greedy"
                       : kind == PolicyKind::FreshestBlock ? "FreshestBlock"
                                                           : "LongestHeaderChain";
    return sapos_wrapped ? "SaPoSWrapped(" + base + ")" : base;
}

SchedulingPolicy SchedulingPolicy::parse(const std::string& s)
{
    SchedulingPolicy p;
    std::string inner = s;
    const std::string wrap = "SaPoSWrapped(";
    if (inner.rfind(wrap, 0) == 0 && inner.back() == ')') {
        p.sapos_wrapped = true;
        inner = inner.substr(wrap.size(), inner.size() - wrap.size() - 1);
    }
    if (inner == "LongestHeaderChain" || inner == "LHC")
        p.kind = PolicyKind::LongestHeaderChain;
    else if (inner == "Greedy")
        p.kind = PolicyKind::Greedy;
    else if (inner == "FreshestBlock")
        p.kind = PolicyKind::FreshestBlock;
    else
        throw ConfigError("policy", "unknown scheduling policy '" + s + "'");
    return p;
}

Node::Node(const NodeConfig& cfg, const NodeContext& ctx) : cfg_(cfg), ctx_(ctx)
{
    grow(kGenesis);
    flags_[kGenesis] = kKnown | kProcessed | kReal;
}

void Node::grow(BlockId b)
{
    if (b < flags_.size())
        return;
    std::size_t n = std::max<std::size_t>(b + 1, std::max<std::size_t>(64, flags_.size() * 2));
    n = std::max(n, ctx_.store->size());
    flags_.resize(n, 0);
    seen_.resize(n, 0);
}

void Node::emit(const TraceEvent& e)
{
    if (ctx_.trace)
        ctx_.trace->push(e);
}

std::uint32_t Node::dchain_height() const { return ctx_.store->height(dtip_); }

HeaderVerdict Node::on_header(BlockId b, Slot slot, std::vector<BlockId>* accepted)
{
    const BlockStore& store = *ctx_.store;
    grow(b);
    if (knows(b))
        return HeaderVerdict::Duplicate;
    if (flags_[b] & kInvalid)
        return HeaderVerdict::Invalid;

    // the chain down to the first known ancestor, lowest first
    std::vector<BlockId> chain{b};
    for (BlockId p = store.parent(b); !knows(p); p = store.parent(p)) {
        if (flags_[p] & kInvalid) {
            for (BlockId x : chain)
                flags_[x] |= kInvalid;
            return HeaderVerdict::Invalid;
        }
        chain.push_back(p);
    }
    std::reverse(chain.begin(), chain.end());

    for (std::size_t i = 0; i < chain.size(); ++i) {
        BlockId x = chain[i];
        const BlockHeader& h = store.header(x);
        const BlockHeader& ph = store.header(h.parent);
        bool ok = (flags_[h.parent] & kInvalid) == 0 && h.bpo.slot > ph.bpo.slot;
        if (ok && cfg_.policy.sapos_wrapped)
            ok = validate_proof_deadline(store, h.parent, h.proofs, cfg_.sapos.k_epf);
        if (!ok) {
            for (std::size_t j = i; j < chain.size(); ++j)
                flags_[chain[j]] |= kInvalid;
            return HeaderVerdict::Invalid;
        }
        flags_[x] |= kKnown;
        seen_[x] = ++*ctx_.seen_clock;
        if (ctx_.trace && ctx_.trace->record_deliveries)
            emit({slot, EventKind::HeaderDelivered, false, cfg_.id, x});
        if (cfg_.pos) {
            BlockId other = known_equivocation(store, *this, x);
            if (other != kNoBlock)
                emit({slot, EventKind::EquivocationSeen, false, cfg_.id, x, other});
        }
        if (processed(h.parent))
            frontier_.push_back(x);
        add_candidate_for(x);
        if (accepted)
            accepted->push_back(x);
    }
    dirty_ = true;
    return HeaderVerdict::Accepted;
}

void Node::add_candidate_for(BlockId b)
{
    const BlockStore& store = *ctx_.store;
    BlockId parent = store.parent(b);
    bool placed = false;
    if (!processed(parent)) {
        for (auto& c : queue_) {
            if (c.tip == parent) {
                c.path.push_back(b);
                c.tip = b;
                placed = true;
                break;
            }
        }
    }
    if (!placed) {
        Candidate c;
        c.tip = b;
        for (BlockId x = b; !processed(x); x = store.parent(x))
            c.path.push_back(x);
        std::reverse(c.path.begin(), c.path.end());
        queue_.push_back(std::move(c));
    }
    if (queue_.size() > cfg_.queue_cap) {
        // drop a candidate stuck on unavailable content before a live one
        std::size_t worst = 0;
        bool worst_blocked = blocked(queue_[0].next());
        for (std::size_t i = 1; i < queue_.size(); ++i) {
            bool bi = blocked(queue_[i].next());
            if ((bi && !worst_blocked) || (bi == worst_blocked && better(queue_[worst], queue_[i]))) {
                worst = i;
                worst_blocked = bi;
            }
        }
        queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(worst));
        ++stats_.queue_evictions;
    }
}

bool Node::better(const Candidate& x, const Candidate& y) const
{
    const BlockStore& store = *ctx_.store;
    switch (cfg_.policy.kind) {
    case PolicyKind::Greedy: {
        std::uint32_t hx = store.height(x.next()), hy = store.height(y.next());
        if (hx != hy)
            return hx > hy;
        break;
    }
    case PolicyKind::FreshestBlock: {
        Slot sx = store.header(x.tip).bpo.slot, sy = store.header(y.tip).bpo.slot;
        if (sx != sy)
            return sx > sy;
        return seen_[x.tip] < seen_[y.tip];
    }
    case PolicyKind::LongestHeaderChain:
        break;
    }
    std::uint32_t tx = store.height(x.tip), ty = store.height(y.tip);
    if (tx != ty)
        return tx > ty;
    return seen_[x.tip] < seen_[y.tip];
}

void Node::normalize_queue()
{
    std::size_t w = 0;
    for (std::size_t i = 0; i < queue_.size(); ++i) {
        Candidate& c = queue_[i];
        while (c.cursor < c.path.size() && processed(c.path[c.cursor]))
            ++c.cursor;
        if (c.cursor == c.path.size())
            continue;
        if (c.cursor > 256) {
            c.path.erase(c.path.begin(), c.path.begin() + static_cast<std::ptrdiff_t>(c.cursor));
            c.cursor = 0;
        }
        if (w != i)
            queue_[w] = std::move(c);
        ++w;
    }
    queue_.resize(w);
}

void Node::rebuild_queue()
{
    // Entries evicted on overflow leave frontier blocks without a candidate.
    const BlockStore& store = *ctx_.store;
    normalize_queue();
    for (BlockId f : frontier_) {
        bool has = false;
        for (const auto& c : queue_)
            if (c.next() == f)
                has = true;
        if (has)
            continue;
        // follow the highest known descendant
        BlockId tip = f;
        std::vector<BlockId> stack{f};
        while (!stack.empty()) {
            BlockId x = stack.back();
            stack.pop_back();
            if (store.height(x) > store.height(tip) ||
                (store.height(x) == store.height(tip) && seen_[x] < seen_[tip]))
                tip = x;
            for (BlockId ch : store.children(x))
                if (knows(ch))
                    stack.push_back(ch);
        }
        Candidate c;
        c.tip = tip;
        for (BlockId x = tip; !processed(x); x = store.parent(x))
            c.path.push_back(x);
        std::reverse(c.path.begin(), c.path.end());
        queue_.push_back(std::move(c));
    }
    if (queue_.size() > cfg_.queue_cap) {
        std::vector<std::uint8_t> stuck(queue_.size());
        for (std::size_t i = 0; i < queue_.size(); ++i)
            stuck[i] = blocked(queue_[i].next());
        std::vector<std::size_t> order(queue_.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (stuck[a] != stuck[b])
                return stuck[a] < stuck[b];
            return better(queue_[a], queue_[b]);
        });
        std::vector<Candidate> kept;
        for (std::size_t i = 0; i < cfg_.queue_cap; ++i)
            kept.push_back(std::move(queue_[order[i]]));
        queue_ = std::move(kept);
    }
    ++stats_.queue_rebuilds;
}

bool Node::blocked(BlockId b)
{
    if (!(flags_[b] & kUnavailable))
        return false;
    if (ctx_.env->content_available(b)) {
        flags_[b] &= static_cast<std::uint8_t>(~kUnavailable);
        return false;
    }
    if (cfg_.policy.sapos_wrapped && known_equivocation(*ctx_.store, *this, b) != kNoBlock)
        return false;  // blanking needs no content
    return true;
}

std::optional<BlockId> Node::schedule_target()
{
    normalize_queue();
    const Candidate* best = nullptr;
    for (const auto& c : queue_) {
        if (blocked(c.next()))
            continue;
        if (!best || better(c, *best))
            best = &c;
    }
    if (!best)
        return std::nullopt;
    return best->next();
}

double Node::cached_progress(BlockId b) const
{
    if (current_.block == b)
        return current_.progress;
    for (const auto& p : cache_)
        if (p.block == b)
            return p.progress;
    return 0.0;
}

void Node::park_current()
{
    if (current_.block == kNoBlock)
        return;
    if (!processed(current_.block) && current_.progress > 0.0) {
        ++stats_.preemptions;
        cache_.push_back(current_);
        if (cache_.size() > cfg_.cache_cap) {
            cache_.erase(cache_.begin());
            ++stats_.evicted_partial;
        }
    }
    current_ = Partial{};
}

Node::Partial Node::take_partial(BlockId b)
{
    for (auto it = cache_.begin(); it != cache_.end(); ++it) {
        if (it->block == b) {
            Partial p = *it;
            cache_.erase(it);
            return p;
        }
    }
    Partial p;
    p.block = b;
    return p;
}

void Node::mark_processed(BlockId b, Slot slot, bool real)
{
    const BlockStore& store = *ctx_.store;
    grow(b);
    if (!processed(store.parent(b)))
        ++stats_.prefix_violations;
    flags_[b] |= kProcessed | (real ? kReal : kBlank);
    auto it = std::find(frontier_.begin(), frontier_.end(), b);
    if (it != frontier_.end())
        frontier_.erase(it);
    for (BlockId ch : store.children(b))
        if (knows(ch) && !processed(ch))
            frontier_.push_back(ch);
    consider_tip(b, slot);
    dirty_ = true;
}

void Node::consider_tip(BlockId b, Slot slot)
{
    const BlockStore& store = *ctx_.store;
    std::uint32_t hb = store.height(b), ht = store.height(dtip_);
    if (hb > ht) {  // ties keep the chain processed first
        BlockId old = dtip_;
        dtip_ = b;
        emit({slot, EventKind::ChainSwitched, false, cfg_.id, old, b, hb});
    }
}

void Node::check_p2(Slot slot)
{
    (void)slot;
    if (ctx_.env->meter(cfg_.id).budget() <= 0.0)
        return;
    for (BlockId f : frontier_) {
        if (!blocked(f)) {
            ++stats_.p2_violations;
            return;
        }
    }
}

void Node::process_step(Slot slot)
{
    if (queue_.empty() && frontier_.empty()) {
        idle_ = true;
        return;
    }
    if (!dirty_ && idle_) {
        // nothing new arrived; only an upload could unblock a candidate
        bool any = false;
        for (const auto& c : queue_)
            if (c.cursor < c.path.size() && (flags_[c.next()] & kUnavailable) && ctx_.env->content_available(c.next()))
                any = true;
        if (!any)
            return;
    }
    dirty_ = false;
    bool rebuilt = false;
    for (;;) {
        std::optional<BlockId> t = schedule_target();
        if (!t) {
            bool stranded = false;
            for (BlockId f : frontier_)
                if (!blocked(f))
                    stranded = true;
            if (stranded && !rebuilt) {
                rebuild_queue();
                rebuilt = true;
                continue;
            }
            idle_ = true;
            check_p2(slot);
            return;
        }
        idle_ = false;
        BlockId b = *t;
        if (cfg_.policy.sapos_wrapped && blanking_schedule_filter(*ctx_.store, *this, b) == BlankDecision::PretendEmpty) {
            if (current_.block == b)
                current_ = Partial{};
            mark_processed(b, slot, false);
            ++stats_.blanked;
            emit({slot, EventKind::PretendEmpty, false, cfg_.id, b});
            continue;
        }
        if (current_.block != b) {
            park_current();
            current_ = take_partial(b);
        }
        FetchResult r = ctx_.env->request_content(cfg_.id, b, current_.progress);
        if (r.spent > 0.0) {
            if (current_.last_slot == slot) {
                current_.paid_last_slot += r.spent;
            } else {
                current_.last_slot = slot;
                current_.paid_last_slot = r.spent;
            }
            stats_.busy += r.spent;
        }
        switch (r.outcome) {
        case FetchOutcome::Unavailable:
            flags_[b] |= kUnavailable;
            ++stats_.unavailable;
            continue;
        case FetchOutcome::Throttled:
            return;
        case FetchOutcome::Fetched: {
            double paid_now = current_.last_slot == slot ? current_.paid_last_slot : 0.0;
            double credit = std::max(0.0, 1.0 - paid_now);
            if (credit < 1e-9)
                credit = 0.0;
            current_ = Partial{};
            ++stats_.fetched;
            TraceEvent e{slot, EventKind::ContentFetched, false, cfg_.id, b};
            e.x = credit;
            emit(e);
            mark_processed(b, slot, true);
            continue;
        }
        }
    }
}

BlockId Node::produce(const BpoId& bpo, Slot slot, const BlockContent& content, BlockId parent_override)
{
    BlockStore& store = *ctx_.store;
    BlockId parent = parent_override == kNoBlock ? dtip_ : parent_override;
    std::vector<EquivocationProof> proofs;
    if (cfg_.policy.sapos_wrapped)
        proofs = attach_proofs(store, *this, parent, cfg_.sapos.k_epf);
    std::uint64_t commitment = content_commitment(content);
    BlockId id = cfg_.pos ? store.pos_extend(bpo, parent, commitment, proofs) : store.pow_extend(bpo, parent, commitment);
    grow(id);
    flags_[id] |= kKnown;
    seen_[id] = ++*ctx_.seen_clock;
    TraceEvent e{slot, EventKind::BlockProduced, bpo.honest, id, parent, bpo.node, bpo.slot, bpo.seq};
    e.x = store.height(id);
    emit(e);
    for (const auto& p : store.header(id).proofs)
        emit({slot, EventKind::ProofIncluded, false, id, p.target,
              static_cast<std::int64_t>(store.height(id)) - store.height(p.target)});
    mark_processed(id, slot, true);
    return id;
}

ConfirmationUpdate Node::advance_confirmation()
{
    const BlockStore& store = *ctx_.store;
    ConfirmationUpdate u;
    std::uint32_t h = store.height(dtip_);
    BlockId conf = h > cfg_.k_conf ? store.ancestor(dtip_, static_cast<std::uint32_t>(h - cfg_.k_conf)) : kGenesis;
    u.confirmed_tip = conf;
    if (conf == confirmed_tip_)
        return u;
    BlockId base = confirmed_tip_;
    if (!store.is_ancestor(confirmed_tip_, conf)) {
        u.reorged = true;
        base = store.lca(confirmed_tip_, conf);
    }
    for (BlockId x = conf; x != base; x = store.parent(x))
        u.newly_confirmed.push_back(x);
    std::reverse(u.newly_confirmed.begin(), u.newly_confirmed.end());
    confirmed_tip_ = conf;
    return u;
}

std::vector<TxId> Node::output_ledger(std::int64_t k_conf) const
{
    const BlockStore& store = *ctx_.store;
    std::vector<TxId> out;
    std::uint32_t h = store.height(dtip_);
    if (h <= k_conf)
        return out;
    BlockId conf = store.ancestor(dtip_, static_cast<std::uint32_t>(h - k_conf));
    std::vector<BlockId> blocks;
    for (BlockId x = conf; x != kGenesis; x = store.parent(x))
        blocks.push_back(x);
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
        if (blank(*it))
            continue;
        const BlockContent* c = ctx_.env->cloud().get(store.header(*it).commitment);
        if (c)
            out.insert(out.end(), c->txs.begin(), c->txs.end());
    }
    return out;
}

}  // namespace nakasim
