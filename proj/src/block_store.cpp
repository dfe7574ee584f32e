#include "nakasim/block_store.hpp"

#include <string>

#include "nakasim/rng.hpp"

namespace nakasim {

std::uint64_t content_commitment(const BlockContent& c)
{
    std::uint64_t h = splitmix64(c.nonce ^ 0x5bd1e995ULL);
    for (TxId t : c.txs)
        h = splitmix64(h ^ t);
    return h | 1;  // zero is reserved for genesis
}

ReusedBpo::ReusedBpo(const BpoId& b)
    : std::runtime_error("BPO reused (slot " + std::to_string(b.slot) + ", seq " + std::to_string(b.seq) + ")"), bpo(b)
{
}

namespace {

// Same skip-list shape as a block index: O(log n) ancestor walks.
std::uint32_t invert_lowest_one(std::uint32_t n) { return n & (n - 1); }

std::uint32_t skip_height(std::uint32_t height)
{
    if (height < 2)
        return 0;
    return (height & 1) ? invert_lowest_one(invert_lowest_one(height - 1)) + 1 : invert_lowest_one(height);
}

}  // namespace

BlockStore::BlockStore()
{
    BlockHeader g;
    g.id = kGenesis;
    g.parent = kNoBlock;
    g.height = 0;
    headers_.push_back(g);
    skip_.push_back(kNoBlock);
    children_.emplace_back();
}

BlockId BlockStore::append(const BpoId& bpo, BlockId parent, std::uint64_t commitment,
                           std::vector<EquivocationProof> proofs)
{
    if (parent >= headers_.size())
        throw std::out_of_range("unknown parent header");
    BlockHeader h;
    h.id = static_cast<BlockId>(headers_.size());
    h.parent = parent;
    h.bpo = bpo;
    h.height = headers_[parent].height + 1;
    h.commitment = commitment;
    h.proofs = std::move(proofs);
    skip_.push_back(ancestor(parent, skip_height(h.height)));
    by_bpo_[bpo].push_back(h.id);
    children_[parent].push_back(h.id);
    children_.emplace_back();
    headers_.push_back(std::move(h));
    return headers_.back().id;
}

BlockId BlockStore::pow_extend(const BpoId& bpo, BlockId parent, std::uint64_t commitment)
{
    if (by_bpo_.count(bpo))
        throw ReusedBpo(bpo);
    return append(bpo, parent, commitment, {});
}

BlockId BlockStore::pos_extend(const BpoId& bpo, BlockId parent, std::uint64_t commitment,
                               std::vector<EquivocationProof> proofs)
{
    auto it = by_bpo_.find(bpo);
    if (it != by_bpo_.end()) {
        for (BlockId id : it->second) {
            const BlockHeader& h = headers_[id];
            if (h.parent == parent && h.commitment == commitment)
                return id;
        }
    }
    return append(bpo, parent, commitment, std::move(proofs));
}

BlockId BlockStore::replay(BlockId expected_id, const BpoId& bpo, BlockId parent, std::uint64_t commitment,
                           std::vector<EquivocationProof> proofs)
{
    if (expected_id != headers_.size())
        throw std::runtime_error("trace block ids are not dense");
    return append(bpo, parent, commitment, std::move(proofs));
}

const std::vector<BlockId>& BlockStore::headers_for_bpo(const BpoId& bpo) const
{
    auto it = by_bpo_.find(bpo);
    return it == by_bpo_.end() ? empty_ : it->second;
}

BlockId BlockStore::ancestor(BlockId id, std::uint32_t height) const
{
    if (id == kNoBlock || height > headers_[id].height)
        return kNoBlock;
    BlockId walk = id;
    std::uint32_t h = headers_[id].height;
    while (h > height) {
        std::uint32_t hs = skip_height(h);
        std::uint32_t hs_prev = skip_height(h - 1);
        if (skip_[walk] != kNoBlock &&
            (hs == height || (hs > height && !(hs_prev < hs - 2 && hs_prev >= height)))) {
            walk = skip_[walk];
            h = hs;
        } else {
            walk = headers_[walk].parent;
            --h;
        }
    }
    return walk;
}

bool BlockStore::is_ancestor(BlockId anc, BlockId desc) const
{
    if (anc == kNoBlock || desc == kNoBlock)
        return false;
    return ancestor(desc, headers_[anc].height) == anc;
}

BlockId BlockStore::lca(BlockId a, BlockId b) const
{
    if (headers_[a].height > headers_[b].height)
        a = ancestor(a, headers_[b].height);
    else
        b = ancestor(b, headers_[a].height);
    if (a == b)
        return a;
    // binary search on height: ancestors agree at and below the lca
    std::uint32_t lo = 0, hi = headers_[a].height;
    while (lo + 1 < hi) {
        std::uint32_t mid = lo + (hi - lo) / 2;
        if (ancestor(a, mid) == ancestor(b, mid))
            lo = mid;
        else
            hi = mid;
    }
    return ancestor(a, lo);
}

}  // namespace nakasim
