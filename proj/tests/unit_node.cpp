#include "doctest.h"

#include <map>
#include <memory>

#include "nakasim/node.hpp"

using namespace nakasim;

namespace {

// One node against a hand-built header tree.
struct Rig {
    SimParams p;
    BlockStore store;
    std::unique_ptr<Environment> env;
    Trace trace;
    std::uint64_t clock = 0;
    std::unique_ptr<Node> node;
    Slot slot = 0;
    Slot bpo_slot = 0;
    TxId next_tx = 1;
    std::map<BlockId, BlockContent> contents;

    explicit Rig(double per_slot, PolicyKind policy = PolicyKind::LongestHeaderChain, std::size_t cache_cap = 10)
    {
        p.tau = 1.0;
        p.capacity = per_slot;
        p.n_nodes = 2;
        env = std::make_unique<Environment>(p, 2, store);
        NodeConfig cfg;
        cfg.policy.kind = policy;
        cfg.cache_cap = cache_cap;
        node = std::make_unique<Node>(cfg, NodeContext{&store, env.get(), &trace, &clock});
    }

    BlockContent content_for(TxId tx) { return BlockContent{{tx}, 0}; }

    BlockId make(BlockId parent, bool upload = true)
    {
        TxId tx = next_tx++;
        BlockContent c = content_for(tx);
        BlockId b = store.pow_extend({++bpo_slot, 1, true, 0}, parent, content_commitment(c));
        contents[b] = c;
        if (upload)
            env->upload_content(b, c);
        return b;
    }

    std::vector<BlockId> chain(BlockId from, int n, int uploaded)
    {
        std::vector<BlockId> out;
        for (int i = 0; i < n; ++i) {
            from = make(from, i < uploaded);
            out.push_back(from);
        }
        return out;
    }

    void upload(BlockId b) { env->upload_content(b, contents.at(b)); }

    void tick()
    {
        env->begin_slot();
        node->process_step(slot);
        ++slot;
    }
};

}  // namespace

TEST_CASE("prefix first: the lowest unprocessed block is fetched first")
{
    Rig r(1.0);
    auto c = r.chain(kGenesis, 3, 3);
    CHECK(r.node->on_header(c[2], 0) == HeaderVerdict::Accepted);
    CHECK(r.node->knows(c[0]));
    REQUIRE(r.node->schedule_target());
    CHECK(*r.node->schedule_target() == c[0]);
    r.tick();
    CHECK(r.node->processed(c[0]));
    CHECK_FALSE(r.node->processed(c[1]));
    CHECK(r.node->dchain_tip() == c[0]);
    r.tick();
    r.tick();
    CHECK(r.node->dchain_tip() == c[2]);
    CHECK(r.node->stats().prefix_violations == 0);
}

TEST_CASE("header validity")
{
    Rig r(1.0);
    BlockId a = r.make(kGenesis);
    CHECK(r.node->on_header(a, 0) == HeaderVerdict::Accepted);
    CHECK(r.node->on_header(a, 0) == HeaderVerdict::Duplicate);
    // a BPO slot not after the parent's makes the header invalid, and its subtree
    BlockId bad = r.store.pow_extend({r.store.header(a).bpo.slot, 2, true, 1}, a, 0);
    BlockId below = r.store.pow_extend({r.bpo_slot + 10, 2, true, 0}, bad, 0);
    CHECK(r.node->on_header(below, 0) == HeaderVerdict::Invalid);
    CHECK(r.node->on_header(bad, 0) == HeaderVerdict::Invalid);
    CHECK_FALSE(r.node->knows(bad));
}

TEST_CASE("a budget of two processes two blocks in one slot")
{
    Rig r(2.0);
    auto c = r.chain(kGenesis, 2, 2);
    r.node->on_header(c[1], 0);
    r.tick();
    CHECK(r.node->dchain_tip() == c[1]);
    CHECK(r.node->stats().busy == doctest::Approx(2.0));
}

TEST_CASE("Greedy prefers the fork with the longest processed prefix")
{
    for (PolicyKind kind : {PolicyKind::Greedy, PolicyKind::LongestHeaderChain}) {
        Rig r(20.0, kind);
        auto a = r.chain(kGenesis, 6, 5);  // 5 of 6 available
        auto b = r.chain(kGenesis, 9, 3);  // 3 of 9 available
        r.node->on_header(a.back(), 0);
        r.node->on_header(b.back(), 0);
        r.tick();
        CHECK(r.node->processed(a[4]));
        CHECK(r.node->processed(b[2]));
        CHECK(r.node->dchain_tip() == a[4]);
        r.upload(a[5]);
        r.upload(b[3]);
        REQUIRE(r.node->schedule_target());
        if (kind == PolicyKind::Greedy)
            CHECK(*r.node->schedule_target() == a[5]);
        else
            CHECK(*r.node->schedule_target() == b[3]);
    }
}

TEST_CASE("preempted work resumes where it stopped")
{
    Rig r(0.2);
    BlockId a = r.make(kGenesis);
    r.node->on_header(a, 0);
    for (int i = 0; i < 3; ++i)
        r.tick();
    CHECK(r.node->cached_progress(a) == doctest::Approx(0.6));

    auto b = r.chain(kGenesis, 2, 2);  // longer fork takes over
    r.node->on_header(b[1], r.slot);
    r.tick();
    CHECK(r.node->stats().preemptions == 1);
    CHECK(r.node->cache_size() == 1);
    CHECK(r.node->cached_progress(a) == doctest::Approx(0.6));

    for (int i = 0; i < 30 && !r.node->processed(a); ++i)
        r.tick();
    CHECK(r.node->processed(b[1]));
    CHECK(r.node->processed(a));
    CHECK(r.node->stats().busy == doctest::Approx(3.0));
    CHECK(r.node->dchain_tip() == b[1]);
}

TEST_CASE("the partial cache evicts the least recently used entry")
{
    Rig r(0.1);
    std::vector<BlockId> firsts;
    for (int i = 0; i < 12; ++i) {
        auto fork = r.chain(kGenesis, i + 1, i + 1);
        firsts.push_back(fork[0]);
        r.node->on_header(fork.back(), r.slot);
        r.tick();
    }
    CHECK(r.node->stats().preemptions == 11);
    CHECK(r.node->stats().evicted_partial == 1);
    CHECK(r.node->cache_size() == 10);
    CHECK(r.node->cached_progress(firsts[0]) == 0.0);
    CHECK(r.node->cached_progress(firsts[1]) == doctest::Approx(0.1));
}

TEST_CASE("withheld content: the node falls back to the honest fork")
{
    Rig r(2.0);
    auto h = r.chain(kGenesis, 2, 2);
    r.node->on_header(h[0], 0);
    r.tick();
    CHECK(r.node->dchain_tip() == h[0]);

    // adversary fork one longer, only its first block has content
    auto a = r.chain(kGenesis, 3, 1);
    r.node->on_header(h[1], r.slot);
    r.node->on_header(a[2], r.slot);
    r.tick();
    CHECK(r.node->processed(a[0]));
    CHECK_FALSE(r.node->processed(a[1]));
    CHECK(r.node->processed(h[1]));
    CHECK(r.node->dchain_tip() == h[1]);
    CHECK(r.node->stats().unavailable >= 1);
    CHECK(r.node->stats().p2_violations == 0);
}

TEST_CASE("equal heights keep the chain processed first")
{
    Rig r(5.0);
    BlockId x = r.make(kGenesis);
    BlockId y = r.make(kGenesis);
    r.node->on_header(x, 0);
    r.tick();
    r.node->on_header(y, r.slot);
    r.tick();
    CHECK(r.node->processed(y));
    CHECK(r.node->dchain_tip() == x);
}

TEST_CASE("produced blocks extend dChain and feed the ledger")
{
    Rig r(1.0);
    for (TxId t = 1; t <= 4; ++t) {
        BlockContent c{{100 + t}, 0};
        BlockId b = r.node->produce({static_cast<Slot>(t), 0, true, 0}, static_cast<Slot>(t), c);
        r.env->upload_content(b, c);
        CHECK(r.node->dchain_tip() == b);
    }
    CHECK(r.node->dchain_height() == 4);
    CHECK(r.node->output_ledger(2) == std::vector<TxId>{101, 102});
    CHECK(r.node->output_ledger(4).empty());

    // two BPOs in one slot on the same parent give siblings
    BlockId parent = r.node->dchain_tip();
    BlockId s1 = r.node->produce({9, 0, true, 0}, 9, {{1}, 1}, parent);
    BlockId s2 = r.node->produce({9, 0, true, 1}, 9, {{2}, 2}, parent);
    CHECK(r.store.parent(s1) == r.store.parent(s2));
    CHECK(r.node->dchain_tip() == s1);
}

TEST_CASE("policy names")
{
    for (const char* n : {"LongestHeaderChain", "Greedy", "FreshestBlock"})
        CHECK(SchedulingPolicy::parse(n).name() == n);
    CHECK(SchedulingPolicy::parse("SaPoSWrapped(Greedy)").sapos_wrapped);
    CHECK_THROWS(SchedulingPolicy::parse("Random"));
}
