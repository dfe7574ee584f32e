#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "nakasim/block_store.hpp"

namespace nakasim {

struct SaPoSParams {
    std::int64_t k_conf = 31;
    std::int64_t k_epf = 20;
    std::int64_t K_cp = 5;

    static SaPoSParams from_kcp(std::int64_t k_cp);
    void validate() const;
};

// What a node has seen of the header tree.
class HeaderKnowledge {
public:
    virtual ~HeaderKnowledge() = default;
    virtual bool knows(BlockId id) const = 0;
};

enum class BlankDecision { Process, PretendEmpty };

// Another known header shares the BPO of `id`; kNoBlock when none.
BlockId known_equivocation(const BlockStore& store, const HeaderKnowledge& k, BlockId id);

BlankDecision blanking_schedule_filter(const BlockStore& store, const HeaderKnowledge& k, BlockId candidate);

// Proofs a producer extending `parent` must carry: every header within
// depth k_epf of the new block (parent is depth 1) that the producer has
// seen equivocated and that has no proof on the chain yet.
std::vector<EquivocationProof> attach_proofs(const BlockStore& store, const HeaderKnowledge& k, BlockId parent,
                                             std::int64_t k_epf);

// Valid iff each proof is a real equivocation against an ancestor at
// depth <= k_epf below a header that extends `parent`.
bool validate_proof_deadline(const BlockStore& store, BlockId parent, const std::vector<EquivocationProof>& proofs,
                             std::int64_t k_epf);

// True iff some block on the chain ending at `tip` carries a proof against `target`.
bool proof_on_chain(const BlockStore& store, BlockId target, BlockId tip, std::int64_t k_epf);

class MissingContent : public std::runtime_error {
public:
    explicit MissingContent(BlockId b);
    BlockId block;
};

struct LedgerEntry {
    BlockId block = kNoBlock;
    bool blanked = false;
};

// The k_conf-deep prefix of the chain ending at `tip` with blanking applied.
// `content_processed(b)` says whether the node holds the real content of b.
template <class ContentFn>
std::vector<LedgerEntry> sapos_ledger(const BlockStore& store, BlockId tip, std::int64_t k_conf, std::int64_t k_epf,
                                      ContentFn content_processed)
{
    std::vector<LedgerEntry> out;
    std::int64_t h = store.height(tip);
    if (h <= k_conf)
        return out;
    BlockId conf = store.ancestor(tip, static_cast<std::uint32_t>(h - k_conf));
    for (BlockId b = conf; b != kGenesis; b = store.parent(b)) {
        LedgerEntry e{b, proof_on_chain(store, b, tip, k_epf)};
        if (!e.blanked && !content_processed(b))
            throw MissingContent(b);
        out.push_back(e);
    }
    return {out.rbegin(), out.rend()};
}

// Abstract chain for the predictable-validity helpers: oldest block first.
using TxChain = std::vector<std::vector<Tx>>;

std::vector<Tx> predictable_tx_filter(const std::vector<Tx>& pending, const TxChain& chain, std::int64_t k_epf);

// Balance counted for `account`: deposits older than k_epf blocks, minus
// withdrawals anywhere, minus max-gas of every included tx on the account.
double gas_deposit_balance(std::uint32_t account, const TxChain& chain, std::int64_t k_epf);
bool gas_deposit_check(const Tx& tx, const TxChain& chain, std::int64_t k_epf);

// Balance when the chain executes with some blocks blanked (mask bit i
// blanks chain[i]); fees are charged as max-gas.
double executed_balance(std::uint32_t account, const TxChain& chain, const std::vector<bool>& blanked);

}  // namespace nakasim
