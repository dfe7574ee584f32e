#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "nakasim/types.hpp"

namespace nakasim {

enum class TxKind : std::uint8_t { Transfer, Deposit, Withdraw };

struct Tx {
    TxId id = 0;
    double size = 0.0;                // in units of the max block size
    std::vector<std::uint32_t> keys;  // abstract read/write state keys
    std::uint32_t account = 0;        // gas deposit account
    double max_gas = 0.0;
    TxKind kind = TxKind::Transfer;
    double amount = 0.0;              // deposit or withdrawal amount
};

struct BlockContent {
    std::vector<TxId> txs;
    std::uint64_t nonce = 0;
};

std::uint64_t content_commitment(const BlockContent& c);

struct EquivocationProof {
    BlockId target = kNoBlock;   // header being proven equivocated
    BlockId witness = kNoBlock;  // a second header for the same BPO
};

struct BlockHeader {
    BlockId id = kGenesis;
    BlockId parent = kNoBlock;
    BpoId bpo;
    std::uint32_t height = 0;
    std::uint64_t commitment = 0;
    std::vector<EquivocationProof> proofs;
};

class ReusedBpo : public std::runtime_error {
public:
    explicit ReusedBpo(const BpoId& b);
    BpoId bpo;
};

// The global header tree: every header ever created by anyone, dense ids.
class BlockStore {
public:
    BlockStore();

    std::size_t size() const { return headers_.size(); }
    const BlockHeader& header(BlockId id) const { return headers_[id]; }
    std::uint32_t height(BlockId id) const { return headers_[id].height; }
    BlockId parent(BlockId id) const { return headers_[id].parent; }

    BlockId pow_extend(const BpoId& bpo, BlockId parent, std::uint64_t commitment);
    BlockId pos_extend(const BpoId& bpo, BlockId parent, std::uint64_t commitment,
                       std::vector<EquivocationProof> proofs = {});
    // Trace replay: insert with a known id (must be the next id).
    BlockId replay(BlockId expected_id, const BpoId& bpo, BlockId parent, std::uint64_t commitment,
                   std::vector<EquivocationProof> proofs = {});

    const std::vector<BlockId>& headers_for_bpo(const BpoId& bpo) const;
    bool is_equivocation(BlockId id) const { return headers_for_bpo(headers_[id].bpo).size() > 1; }

    BlockId ancestor(BlockId id, std::uint32_t height) const;
    bool is_ancestor(BlockId anc, BlockId desc) const;  // reflexive
    BlockId lca(BlockId a, BlockId b) const;
    const std::vector<BlockId>& children(BlockId id) const { return children_[id]; }

private:
    BlockId append(const BpoId& bpo, BlockId parent, std::uint64_t commitment, std::vector<EquivocationProof> proofs);

    std::vector<BlockHeader> headers_;
    std::vector<BlockId> skip_;
    std::vector<std::vector<BlockId>> children_;
    std::unordered_map<BpoId, std::vector<BlockId>, BpoHash> by_bpo_;
    std::vector<BlockId> empty_;
};

}  // namespace nakasim
