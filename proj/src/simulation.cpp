#include "nakasim/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "nakasim/rng.hpp"

namespace nakasim {

std::string protocol_name(Protocol p)
{
    switch (p) {
    case Protocol::PoW: return "PoW";
    case Protocol::PoS: return "PoS";
    case Protocol::SaPoS: return "SaPoS";
    }
    return "PoW";
}

Protocol parse_protocol(const std::string& s)
{
    if (s == "PoW")
        return Protocol::PoW;
    if (s == "PoS")
        return Protocol::PoS;
    if (s == "SaPoS")
        return Protocol::SaPoS;
    throw ConfigError("protocol", "unknown protocol '" + s + "'");
}

void ScenarioConfig::validate() const
{
    params.validate();
    if (protocol == Protocol::SaPoS) {
        sapos.validate();
        if (!policy.sapos_wrapped)
            throw ConfigError("policy", "SaPoS protocol needs a SaPoSWrapped policy");
    } else if (policy.sapos_wrapped) {
        throw ConfigError("policy", "SaPoSWrapped policy needs the SaPoS protocol");
    }
    if (attack.strategy == AttackKind::PosTeaser && protocol == Protocol::PoW)
        throw ConfigError("attack.strategy", "PosTeaser needs a PoS lottery");
    if (attack.strategy == AttackKind::Partition && attack.partition_duration < 0.0)
        throw ConfigError("attack.partition_duration", "must be non-negative");
    if (attack.spv_rate < 0.0)
        throw ConfigError("attack.spv_rate", "must be non-negative");
    if (attack.run_after < 0.0)
        throw ConfigError("attack.run_after", "must be non-negative");
    if (k_cp <= 0)
        throw ConfigError("k_cp", "must be positive");
    if (queue_cap == 0 || cache_cap == 0)
        throw ConfigError("queue_cap", "queue and cache capacities must be positive");
    if (txgen.rate < 0.0 || txgen.tx_size <= 0.0 || txgen.tx_size > 1.0)
        throw ConfigError("txgen", "rate must be >= 0 and tx_size in (0, 1]");
    if (warmup < 0.0)
        throw ConfigError("warmup", "must be non-negative");
}

Simulation::Simulation(const ScenarioConfig& cfg)
    : cfg_(cfg),
      lottery_(cfg.params),
      store_(),
      env_(cfg.params, lottery_.classes().honest_count, store_),
      adversary_(cfg.attack)
{
    cfg_.validate();
    trace_.record_deliveries = cfg_.record_trace && cfg_.record_deliveries;
    RunInfo& info = trace_.info;
    info.params = cfg_.params;
    info.honest_nodes = honest_count();
    info.protocol = protocol_name(cfg_.protocol);
    info.policy = cfg_.policy.name();
    info.attack = attack_name(cfg_.attack.strategy);
    info.k_conf = cfg_.k_conf();
    info.k_epf = cfg_.protocol == Protocol::SaPoS ? cfg_.sapos.k_epf : 0;

    NodeContext ctx;
    ctx.store = &store_;
    ctx.env = &env_;
    ctx.trace = cfg_.record_trace ? &trace_ : nullptr;
    ctx.seen_clock = &seen_clock_;
    nodes_.reserve(honest_count());
    for (NodeId n = 0; n < honest_count(); ++n) {
        NodeConfig nc;
        nc.id = n;
        nc.policy = cfg_.policy;
        nc.pos = cfg_.protocol != Protocol::PoW;
        nc.sapos = cfg_.sapos;
        nc.k_conf = cfg_.k_conf();
        nc.queue_cap = cfg_.queue_cap;
        nc.cache_cap = cfg_.cache_cap;
        nodes_.emplace_back(nc, ctx);
    }
    contents_.emplace_back();
    max_tx_.push_back(0);

    double tau = cfg_.params.tau;
    Slot start = static_cast<Slot>(std::llround(cfg_.attack.run_after / tau));
    if (cfg_.attack.strategy == AttackKind::Partition) {
        Slot len = static_cast<Slot>(std::llround(cfg_.attack.partition_duration / tau));
        env_.set_partition(start, start + len, honest_count() / 2);
        info.excluded_until = len > 0 ? start + len : -1;
    }
    warmup_slot_ = static_cast<Slot>(std::llround(cfg_.warmup / tau));
    warm_recorded_ = warmup_slot_ == 0;
}

BlockContent Simulation::empty_content()
{
    BlockContent c;
    c.nonce = splitmix64(cfg_.params.seed ^ (0xA5A5ULL << 32) ^ store_.size() ^ (contents_.size() << 20));
    return c;
}

BlockContent Simulation::honest_content(BlockId parent, Slot slot)
{
    BlockContent c = empty_content();
    (void)slot;
    if (cfg_.txgen.rate > 0.0) {
        TxId from = max_tx_[parent];
        auto room = static_cast<TxId>(std::floor(1.0 / cfg_.txgen.tx_size + 1e-9));
        TxId to = std::min(tx_generated_, from + room);
        for (TxId t = from + 1; t <= to; ++t)
            c.txs.push_back(t);
    }
    return c;
}

BlockId Simulation::create_block(const BpoId& bpo, BlockId parent, const BlockContent& content, Slot slot)
{
    std::uint64_t commitment = content_commitment(content);
    BlockId id = cfg_.protocol == Protocol::PoW ? store_.pow_extend(bpo, parent, commitment)
                                                : store_.pos_extend(bpo, parent, commitment);
    if (id >= contents_.size()) {
        contents_.resize(id + 1);
        max_tx_.resize(id + 1, 0);
    }
    contents_[id] = content;
    TxId mx = max_tx_[parent];
    for (TxId t : content.txs)
        mx = std::max(mx, t);
    max_tx_[id] = mx;
    if (cfg_.record_trace) {
        TraceEvent e{slot, EventKind::BlockProduced, bpo.honest, id, parent, bpo.node, bpo.slot, bpo.seq};
        e.x = store_.height(id);
        trace_.push(e);
    }
    return id;
}

const BlockContent& Simulation::content_of(BlockId b) const { return contents_[b]; }

void Simulation::upload(BlockId b, const BlockContent& content, Slot slot)
{
    if (env_.upload_content(b, content) == UploadResult::Stored) {
        if (cfg_.record_trace)
            trace_.push({slot, EventKind::ContentUploaded, false, b});
        quiet_ = false;
    }
}

void Simulation::note_public(BlockId b)
{
    std::uint32_t h = store_.height(b);
    std::uint32_t ph = store_.height(public_best_);
    if (h > ph) {
        public_best_ = b;
    }
}

void Simulation::deliver(NodeId n, BlockId b, Slot slot)
{
    scratch_.clear();
    if (nodes_[n].on_header(b, slot, &scratch_) != HeaderVerdict::Accepted)
        return;
    quiet_ = false;
    for (BlockId a : scratch_) {
        note_public(a);
        env_.broadcast_header(a, n, slot);  // relay, once per header
    }
}

void Simulation::push_header(NodeId node, BlockId b, Slot slot)
{
    if (node < nodes_.size())
        deliver(node, b, slot);
}

void Simulation::push_header_all(BlockId b, Slot slot)
{
    for (NodeId n = 0; n < nodes_.size(); ++n)
        deliver(n, b, slot);
}

void Simulation::drain_deliveries(Slot slot)
{
    for (;;) {
        auto due = env_.take_due(slot);
        if (due.empty())
            return;
        for (const auto& e : due)
            for (NodeId n = e.target_lo; n < e.target_hi; ++n)
                deliver(n, e.header, slot);
    }
}

BlockId Simulation::best_honest_tip() const
{
    BlockId best = kGenesis;
    for (const auto& n : nodes_)
        if (store_.height(n.dchain_tip()) > store_.height(best))
            best = n.dchain_tip();
    return best;
}

std::uint32_t Simulation::max_honest_height() const { return store_.height(best_honest_tip()); }

std::uint32_t Simulation::min_honest_height() const
{
    std::uint32_t m = UINT32_MAX;
    for (const auto& n : nodes_)
        m = std::min(m, n.dchain_height());
    return nodes_.empty() ? 0 : m;
}

BlockId Simulation::agreed_block() const
{
    if (nodes_.empty())
        return kGenesis;
    BlockId a = nodes_[0].dchain_tip();
    for (const auto& n : nodes_)
        a = store_.lca(a, n.dchain_tip());
    return a;
}

void Simulation::step(Slot slot)
{
    slot_ = slot;
    const SimParams& p = cfg_.params;
    env_.begin_slot();

    if (cfg_.txgen.rate > 0.0) {
        tx_carry_ += cfg_.txgen.rate * p.tau;
        auto whole = static_cast<TxId>(std::floor(tx_carry_));
        tx_generated_ += whole;
        tx_carry_ -= static_cast<double>(whole);
    }

    SlotOutcome out = lottery_.sample_slot(slot);
    std::vector<BpoId> spv;
    if (cfg_.attack.spv_rate > 0.0)
        spv = lottery_.sample_spv(slot, cfg_.attack.spv_rate * p.tau);
    if (!out.bpos.empty() || !spv.empty())
        quiet_ = false;
    if (cfg_.record_trace) {
        for (const auto& b : out.bpos)
            trace_.push({slot, EventKind::Bpo, b.honest, b.node, b.seq});
        for (const auto& b : spv)
            trace_.push({slot, EventKind::Bpo, false, b.node, b.seq});
    }

    // Honest producers all extend dChain as it stood at the end of the last slot.
    std::vector<BpoId> adv_bpos;
    std::vector<std::pair<NodeId, BlockId>> produced;
    std::vector<BlockId> parents(nodes_.size(), kNoBlock);
    for (const auto& b : out.bpos) {
        if (!b.honest) {
            adv_bpos.push_back(b);
            continue;
        }
        if (parents[b.node] == kNoBlock)
            parents[b.node] = nodes_[b.node].dchain_tip();
    }
    for (const auto& b : out.bpos) {
        if (!b.honest)
            continue;
        Node& node = nodes_[b.node];
        BlockContent c = honest_content(parents[b.node], slot);
        BlockId id = node.produce(b, slot, c, parents[b.node]);
        if (id >= contents_.size()) {
            contents_.resize(id + 1);
            max_tx_.resize(id + 1, 0);
        }
        contents_[id] = c;
        TxId mx = max_tx_[parents[b.node]];
        for (TxId t : c.txs)
            mx = std::max(mx, t);
        max_tx_[id] = mx;
        upload(id, c, slot);
        env_.broadcast_header(id, b.node, slot);
        note_public(id);
        produced.emplace_back(b.node, id);
        adversary_.on_honest_block(id, store_.height(id));
    }

    // SPV miners extend the longest public header chain with empty blocks.
    for (const auto& b : spv) {
        BlockContent c = empty_content();
        BlockId id = create_block(b, public_best_, c, slot);
        upload(id, c, slot);
        env_.broadcast_header(id, kNoNode, slot);
        note_public(id);
    }

    drain_deliveries(slot);
    adversary_.step(*this, slot, adv_bpos);
    drain_deliveries(slot);

    // quiet: every node was idle last slot and nothing arrived since
    if (!quiet_)
        for (auto& n : nodes_)
            n.process_step(slot);
    bookkeeping(slot);
}

void Simulation::bookkeeping(Slot slot)
{
    bool all_idle = true;
    for (const auto& n : nodes_)
        all_idle = all_idle && n.idle();
    bool was_quiet = quiet_;
    quiet_ = all_idle;

    if (!warm_recorded_ && slot + 1 >= warmup_slot_) {
        lmin_warm_ = min_honest_height();
        warm_recorded_ = true;
    }

    // lead: private tip height minus the best honest dChain height
    if (cfg_.attack.strategy == AttackKind::Private || cfg_.attack.strategy == AttackKind::Teaser ||
        cfg_.attack.strategy == AttackKind::PosTeaser) {
        std::int64_t lead = static_cast<std::int64_t>(adversary_.private_height(*this)) - max_honest_height();
        if (lead != last_lead_ && cfg_.record_trace)
            trace_.push({slot, EventKind::LeadSample, false, lead});
        last_lead_ = lead;
        max_lead_ = std::max(max_lead_, lead);
        if (slot >= warmup_slot_) {
            ++lead_slots_;
            if (lead > 0)
                ++lead_positive_slots_;
        }
    }

    if (was_quiet)
        return;  // no dChain moved
    bool sapos = cfg_.protocol == Protocol::SaPoS;
    for (auto& n : nodes_) {
        ConfirmationUpdate u = n.advance_confirmation();
        if (u.newly_confirmed.empty() && !u.reorged)
            continue;
        if (u.reorged)
            ++audit_.confirmed_reorgs;
        if (cfg_.record_trace)
            trace_.push({slot, EventKind::LedgerOutput, false, n.id(), u.confirmed_tip, store_.height(u.confirmed_tip)});
        if (!sapos)
            continue;
        for (BlockId b : u.newly_confirmed) {
            bool blanked = proof_on_chain(store_, b, n.dchain_tip(), cfg_.sapos.k_epf);
            if (blanked) {
                ++audit_.blanked_confirmed;
                if (cfg_.record_trace)
                    trace_.push({slot, EventKind::Blanked, false, n.id(), b});
                if (store_.header(b).bpo.honest)
                    ++audit_.honest_blanked;
            } else if (!n.has_real_content(b)) {
                ++audit_.missing_content;
            }
            auto [it, fresh] = blank_status_.emplace(b, blanked);
            if (!fresh && it->second != blanked)
                ++audit_.blank_mismatches;
        }
    }
}

void Simulation::run()
{
    for (Slot t = slot_ + 1; t < cfg_.params.horizon_slots; ++t)
        step(t);
}

RunMetrics Simulation::metrics() const
{
    RunMetrics m = audit_;
    const SimParams& p = cfg_.params;
    m.slots = slot_ + 1;
    m.seconds = m.slots * p.tau;
    m.lmin_start = warm_recorded_ ? lmin_warm_ : 0;
    m.lmin_end = min_honest_height();
    double span = (m.slots - std::min<Slot>(warmup_slot_, m.slots)) * p.tau;
    m.growth_rate = span > 0 ? (static_cast<double>(m.lmin_end) - m.lmin_start) / span : 0.0;
    double lh = p.lambda_honest();
    m.growth_normalized = lh > 0 ? m.growth_rate / lh : 0.0;
    m.tip_height = max_honest_height();
    m.agreed_height = store_.height(agreed_block());
    m.blocks = store_.size() - 1;
    double avail = m.slots * p.capacity * p.tau;
    for (const auto& n : nodes_) {
        const NodeStats& s = n.stats();
        m.utilization.push_back(avail > 0 ? s.busy / avail : 0.0);
        m.p2_violations += s.p2_violations;
        m.prefix_violations += s.prefix_violations;
        m.queue_evictions += s.queue_evictions;
    }
    for (BlockId b = 1; b < store_.size(); ++b)
        if (store_.header(b).bpo.honest)
            ++m.honest_blocks;
    if (!m.utilization.empty()) {
        double s = 0;
        for (double u : m.utilization)
            s += u;
        m.mean_utilization = s / m.utilization.size();
    }
    m.final_lead = last_lead_;
    m.max_lead = max_lead_;
    m.lead_positive_fraction = lead_slots_ ? static_cast<double>(lead_positive_slots_) / lead_slots_ : 0.0;
    m.teases = adversary_.state().teases;
    m.restarts = adversary_.state().restarts;
    return m;
}

RunMetrics run_scenario(const ScenarioConfig& cfg, Trace* trace_out)
{
    auto sim = std::make_unique<Simulation>(cfg);
    sim->run();
    RunMetrics m = sim->metrics();
    if (trace_out)
        *trace_out = std::move(sim->trace());
    return m;
}

}  // namespace nakasim
