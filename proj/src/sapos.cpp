#include "nakasim/sapos.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

namespace nakasim {

SaPoSParams SaPoSParams::from_kcp(std::int64_t k_cp)
{
    SaPoSParams p;
    p.K_cp = k_cp;
    p.k_conf = 6 * k_cp + 1;
    p.k_epf = 4 * k_cp;
    return p;
}

void SaPoSParams::validate() const
{
    if (K_cp <= 0)
        throw ConfigError("sapos.K_cp", "must be positive");
    if (k_conf != 6 * K_cp + 1)
        throw ConfigError("sapos.k_conf", "must equal 6*K_cp + 1");
    if (k_epf != 4 * K_cp)
        throw ConfigError("sapos.k_epf", "must equal 4*K_cp");
}

BlockId known_equivocation(const BlockStore& store, const HeaderKnowledge& k, BlockId id)
{
    const auto& same = store.headers_for_bpo(store.header(id).bpo);
    if (same.size() < 2)
        return kNoBlock;
    for (BlockId o : same)
        if (o != id && k.knows(o))
            return o;
    return kNoBlock;
}

BlankDecision blanking_schedule_filter(const BlockStore& store, const HeaderKnowledge& k, BlockId candidate)
{
    return known_equivocation(store, k, candidate) == kNoBlock ? BlankDecision::Process : BlankDecision::PretendEmpty;
}

bool proof_on_chain(const BlockStore& store, BlockId target, BlockId tip, std::int64_t k_epf)
{
    std::uint32_t th = store.height(target);
    std::uint32_t top = store.height(tip);
    if (top <= th)
        return false;
    std::uint32_t hi = static_cast<std::uint32_t>(std::min<std::int64_t>(top, th + k_epf));
    BlockId b = store.ancestor(tip, hi);
    for (std::uint32_t h = hi; h > th; --h, b = store.parent(b)) {
        for (const auto& p : store.header(b).proofs)
            if (p.target == target)
                return true;
    }
    return false;
}

std::vector<EquivocationProof> attach_proofs(const BlockStore& store, const HeaderKnowledge& k, BlockId parent,
                                             std::int64_t k_epf)
{
    std::vector<EquivocationProof> out;
    BlockId b = parent;
    for (std::int64_t depth = 1; depth <= k_epf && b != kGenesis; ++depth, b = store.parent(b)) {
        BlockId witness = known_equivocation(store, k, b);
        if (witness == kNoBlock)
            continue;
        if (proof_on_chain(store, b, parent, k_epf))
            continue;
        out.push_back({b, witness});
    }
    std::reverse(out.begin(), out.end());
    return out;
}

bool validate_proof_deadline(const BlockStore& store, BlockId parent, const std::vector<EquivocationProof>& proofs,
                             std::int64_t k_epf)
{
    std::int64_t carrier_height = static_cast<std::int64_t>(store.height(parent)) + 1;
    for (const auto& p : proofs) {
        if (p.target >= store.size() || p.witness >= store.size() || p.target == p.witness)
            return false;
        const BlockHeader& t = store.header(p.target);
        const BlockHeader& w = store.header(p.witness);
        if (!(t.bpo == w.bpo))
            return false;
        if (!store.is_ancestor(p.target, parent))
            return false;
        if (carrier_height - static_cast<std::int64_t>(t.height) > k_epf)
            return false;
    }
    return true;
}

MissingContent::MissingContent(BlockId b)
    : std::runtime_error("confirmed block " + std::to_string(b) + " has neither content nor a proof"), block(b)
{
}

std::vector<Tx> predictable_tx_filter(const std::vector<Tx>& pending, const TxChain& chain, std::int64_t k_epf)
{
    std::unordered_set<std::uint32_t> recent;
    std::int64_t n = static_cast<std::int64_t>(chain.size());
    for (std::int64_t i = std::max<std::int64_t>(0, n - k_epf); i < n; ++i)
        for (const Tx& tx : chain[i])
            recent.insert(tx.keys.begin(), tx.keys.end());
    std::vector<Tx> out;
    for (const Tx& tx : pending) {
        bool clash = std::any_of(tx.keys.begin(), tx.keys.end(), [&](std::uint32_t key) { return recent.count(key); });
        if (!clash)
            out.push_back(tx);
    }
    return out;
}

double gas_deposit_balance(std::uint32_t account, const TxChain& chain, std::int64_t k_epf)
{
    std::int64_t n = static_cast<std::int64_t>(chain.size());
    std::int64_t old_end = std::max<std::int64_t>(0, n - k_epf);
    double bal = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        for (const Tx& tx : chain[i]) {
            if (tx.account != account)
                continue;
            if (tx.kind == TxKind::Deposit && i < old_end)
                bal += tx.amount;
            else if (tx.kind == TxKind::Withdraw)
                bal -= tx.amount;
            bal -= tx.max_gas;
        }
    }
    return bal;
}

bool gas_deposit_check(const Tx& tx, const TxChain& chain, std::int64_t k_epf)
{
    return gas_deposit_balance(tx.account, chain, k_epf) >= tx.max_gas;
}

double executed_balance(std::uint32_t account, const TxChain& chain, const std::vector<bool>& blanked)
{
    double bal = 0.0;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        if (i < blanked.size() && blanked[i])
            continue;
        for (const Tx& tx : chain[i]) {
            if (tx.account != account)
                continue;
            if (tx.kind == TxKind::Deposit)
                bal += tx.amount;
            else if (tx.kind == TxKind::Withdraw)
                bal -= tx.amount;
            bal -= tx.max_gas;
        }
    }
    return bal;
}

}  // namespace nakasim
