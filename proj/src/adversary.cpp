#include "nakasim/adversary.hpp"

#include <algorithm>
#include <cmath>

#include "nakasim/simulation.hpp"

namespace nakasim {

std::string attack_name(AttackKind a)
{
    switch (a) {
    case AttackKind::None: return "None";
    case AttackKind::Private: return "Private";
    case AttackKind::Teaser: return "Teaser";
    case AttackKind::PosTeaser: return "PosTeaser";
    case AttackKind::Partition: return "Partition";
    }
    return "None";
}

AttackKind parse_attack(const std::string& s)
{
    if (s == "None" || s == "none")
        return AttackKind::None;
    if (s == "Private" || s == "private")
        return AttackKind::Private;
    if (s == "Teaser" || s == "teaser")
        return AttackKind::Teaser;
    if (s == "PosTeaser" || s == "pos-teaser")
        return AttackKind::PosTeaser;
    if (s == "Partition" || s == "partition")
        return AttackKind::Partition;
    throw ConfigError("attack.strategy", "unknown attack '" + s + "'");
}

void Adversary::on_honest_block(BlockId b, std::uint32_t height)
{
    (void)b;
    announced_height_ = std::max(announced_height_, height);
}

std::uint32_t Adversary::private_height(const Simulation& sim) const
{
    BlockId tip = st_.private_chain.empty() ? st_.fork_base : st_.private_chain.back();
    return sim.store().height(tip);
}

void Adversary::step(Simulation& sim, Slot slot, const std::vector<BpoId>& bpos)
{
    Slot start = static_cast<Slot>(std::llround(cfg_.run_after / sim.params().tau));
    if (slot < start)
        return;  // corrupted BPOs before the attack starts go unused
    switch (cfg_.strategy) {
    case AttackKind::Private: private_attack_step(sim, slot, bpos); break;
    case AttackKind::Teaser: teaser_step(sim, slot, bpos); break;
    case AttackKind::PosTeaser: pos_teaser_step(sim, slot, bpos); break;
    case AttackKind::None:
    case AttackKind::Partition: break;
    }
    if (!st_.private_chain.empty() || cfg_.strategy != AttackKind::None)
        st_.lead = static_cast<std::int64_t>(private_height(sim)) - sim.max_honest_height();
}

void Adversary::restart_if_beaten(Simulation& sim)
{
    if (st_.private_chain.empty()) {
        st_.fork_base = sim.best_honest_tip();
        st_.headers_released = 0;
        st_.contents_released = 0;
        return;
    }
    if (private_height(sim) >= sim.max_honest_height())
        return;
    ++st_.restarts;
    st_.fork_base = sim.best_honest_tip();
    st_.private_chain.clear();
    st_.headers_released = 0;
    st_.contents_released = 0;
}

void Adversary::mine(Simulation& sim, Slot slot, const BpoId& bpo)
{
    BlockId parent = st_.private_chain.empty() ? st_.fork_base : st_.private_chain.back();
    if (sim.store().header(parent).bpo.slot >= slot)
        return;  // a second BPO in the same slot cannot extend the first
    BlockContent c = sim.empty_content();
    st_.private_chain.push_back(sim.create_block(bpo, parent, c, slot));
    ++mined_;
}

void Adversary::private_attack_step(Simulation& sim, Slot slot, const std::vector<BpoId>& bpos)
{
    restart_if_beaten(sim);
    for (const auto& b : bpos)
        mine(sim, slot, b);
}

void Adversary::tease(Simulation& sim, Slot slot, std::uint32_t h)
{
    const BlockStore& store = sim.store();
    std::uint32_t base = store.height(st_.fork_base);
    // private_chain[i] sits at height base + 1 + i
    if (private_height(sim) < h + 1)
        return;
    std::size_t upto = h + 1 - base;  // headers up to height h+1
    BlockId tip = st_.private_chain[upto - 1];
    std::size_t fresh = upto > st_.headers_released ? upto - st_.headers_released : 0;
    for (std::size_t i = st_.headers_released; i < upto; ++i)
        sim.push_header_all(st_.private_chain[i], slot);
    st_.headers_released = std::max(st_.headers_released, upto);

    // one more block's content, kept strictly below the new honest height so
    // the processed adversary chain never gets ahead
    std::int64_t content_block = -1;
    if (st_.contents_released < st_.private_chain.size()) {
        BlockId next = st_.private_chain[st_.contents_released];
        if (store.height(next) < h) {
            sim.upload(next, sim.content_of(next), slot);
            content_block = next;
            ++st_.contents_released;
        }
    }
    ++st_.teases;
    st_.last_teased_height = h;
    sim.trace().push({slot, EventKind::AdversaryRelease, false, tip, static_cast<std::int64_t>(fresh), content_block});
}

void Adversary::teaser_step(Simulation& sim, Slot slot, const std::vector<BpoId>& bpos)
{
    restart_if_beaten(sim);
    for (const auto& b : bpos)
        mine(sim, slot, b);
    if (announced_height_ > st_.last_teased_height)
        tease(sim, slot, announced_height_);
}

void Adversary::release_copy(Simulation& sim, Slot slot, std::uint32_t h)
{
    // re-sign the private chain's BPOs on fresh headers up to height h+1;
    // contents stay below every honest dChain so no node can adopt the copy
    const BlockStore& store = sim.store();
    std::uint32_t base = store.height(st_.fork_base);
    if (private_height(sim) < h + 1)
        return;
    std::size_t want = h + 1 - base;
    BlockId parent = st_.fork_base;
    std::vector<BlockId> copy;
    for (std::size_t i = 0; i < want; ++i) {
        BlockContent c = sim.empty_content();
        BlockId id = sim.create_block(store.header(st_.private_chain[i]).bpo, parent, c, slot);
        copy.push_back(id);
        parent = id;
    }
    std::int64_t first = -1;
    std::uint32_t lmin = sim.min_honest_height();
    for (BlockId id : copy) {
        if (store.height(id) < lmin) {
            sim.upload(id, sim.content_of(id), slot);
            if (first < 0)
                first = id;
        }
        sim.push_header_all(id, slot);
    }
    ++st_.copies;
    ++st_.teases;
    st_.last_teased_height = h;
    sim.trace().push({slot, EventKind::AdversaryRelease, false, copy.back(), static_cast<std::int64_t>(copy.size()), first});
}

void Adversary::pos_teaser_step(Simulation& sim, Slot slot, const std::vector<BpoId>& bpos)
{
    restart_if_beaten(sim);
    for (const auto& b : bpos)
        mine(sim, slot, b);
    if (announced_height_ > st_.last_teased_height)
        release_copy(sim, slot, announced_height_);
}

}  // namespace nakasim
