#include "support.hpp"

#include "mpool/peer.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace mpool;

namespace {

std::set<std::size_t> all_chunks(std::size_t n)
{
    std::set<std::size_t> s;
    for (std::size_t i = 0; i < n; ++i)
        s.insert(i);
    return s;
}

/// A viewer with a confirmed pool and a few cachers on a shared ledger.
struct Swarm {
    static constexpr Amount kChunkValue = 5;

    ChunkSource source;
    ChunkManifest manifest;
    KeyPair viewer_keys = test::actor("viewer");
    std::vector<KeyPair> cacher_keys;
    Ledger ledger;
    ViewerNode viewer;
    std::vector<CacherNode> cachers;

    Swarm(std::size_t chunks, Amount deposit, Amount collateral,
          std::vector<CacherBehavior> behaviors, PayerMode mode = PayerMode::Honest)
        : source(9, 64, chunks),
          manifest(source.manifest(kChunkValue)),
          cacher_keys(make_keys(behaviors.size())),
          ledger(LedgerConfig{1, 6}, genesis(deposit + collateral)),
          viewer(viewer_keys, manifest, deposit, mode)
    {
        for (std::size_t i = 0; i < behaviors.size(); ++i)
            cachers.emplace_back(cacher_keys[i], &source, manifest, all_chunks(chunks), behaviors[i]);
        auto h = ledger.submit(
            make_tx(viewer_keys, CreatePool{manifest.resource_id, deposit, collateral, 1000}, 0));
        ledger.commit_block();
        viewer.attach_pool(h);
    }
    // Cachers point at `source`, so a Swarm must stay put.
    Swarm(const Swarm&) = delete;
    Swarm& operator=(const Swarm&) = delete;

    static std::vector<KeyPair> make_keys(std::size_t n)
    {
        std::vector<KeyPair> out;
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(test::actor("cacher", i));
        return out;
    }

    Ledger::Genesis genesis(Amount viewer_funds) const
    {
        Ledger::Genesis g{{viewer_keys.address, viewer_funds}};
        for (const auto& k : cacher_keys)
            g.emplace_back(k.address, 0);
        return g;
    }

    Amount earnings(std::size_t i) const { return ledger.balance(cacher_keys[i].address); }
};

struct PolicyResult {
    Amount earned = 0;
    std::uint64_t settlements = 0;
};

/// Streams `chunks` chunks from one cacher under `policy`, settling as the
/// policy asks and once more at the end.
PolicyResult stream_with_policy(const SettlementPolicy& policy, std::size_t chunks)
{
    Swarm s(chunks, chunks * Swarm::kChunkValue, chunks * Swarm::kChunkValue + 1,
            {CacherBehavior::Honest});
    auto& cacher = s.cachers[0];
    switch_peer(s.viewer, cacher, s.ledger);
    for (std::size_t i = 0; i < chunks; ++i) {
        EXPECT_EQ(request_chunk(s.viewer, cacher, i), ChunkExchangeOutcome::Delivered);
        if (cacher.wants_to_settle(s.viewer_keys.address, policy, 1)) {
            cacher.settle(s.ledger, s.viewer_keys.address);
            s.viewer.view().note_settlement(cacher.id());
            s.ledger.commit_block();
        }
    }
    if (cacher.has_claim(s.viewer_keys.address, 1)) {
        cacher.settle(s.ledger, s.viewer_keys.address);
        s.ledger.commit_block();
    }
    return {s.earnings(0), cacher.settlements_sent()};
}

} // namespace

TEST(manifest, resource_id_binds_chunks_and_price)
{
    ChunkSource source(1, 32, 4);
    auto m = source.manifest(5);
    EXPECT_TRUE(m.self_consistent());
    EXPECT_EQ(m.total_value(), 20u);
    ByteWriter w;
    for (const auto& h : m.chunk_hashes)
        w.raw(h.bytes);
    w.u64(5);
    EXPECT_EQ(m.resource_id, hash(w.bytes()));
    EXPECT_NE(source.manifest(6).resource_id, m.resource_id);
    EXPECT_EQ(source.chunk(2), ChunkSource(1, 32, 4).chunk(2));
    EXPECT_EQ(source.chunk(2).size(), 32u);
    EXPECT_NE(source.chunk(1), source.chunk(2));
}

TEST(manifest, text_round_trip_and_errors)
{
    auto m = ChunkSource(2, 16, 5).manifest(3);
    std::stringstream buf;
    write_manifest(buf, m);
    auto back = read_manifest(buf);
    EXPECT_EQ(back.resource_id, m.resource_id);
    EXPECT_EQ(back.chunk_hashes, m.chunk_hashes);
    EXPECT_EQ(back.chunk_value, 3u);

    std::stringstream out;
    write_manifest(out, m);
    auto text = out.str();
    text[text.size() - 3] = text[text.size() - 3] == 'a' ? 'b' : 'a';
    std::stringstream bad(text);
    try {
        read_manifest(bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
    }
    std::stringstream garbage("not a manifest");
    EXPECT_THROW(read_manifest(garbage), Error);
}

TEST(manifest, verify_chunk)
{
    ChunkSource source(3, 48, 4);
    auto m = source.manifest(5);
    EXPECT_TRUE(verify_chunk(m, 1, source.chunk(1)));
    auto flipped = source.chunk(1);
    flipped[7] ^= 1;
    EXPECT_FALSE(verify_chunk(m, 1, flipped));
    EXPECT_FALSE(verify_chunk(m, 2, source.chunk(1)));
    EXPECT_THROW(verify_chunk(m, 4, source.chunk(1)), Error);
}

TEST(policy, parse_and_format)
{
    EXPECT_EQ(SettlementPolicy::parse("every_chunk").kind, SettlementPolicy::Kind::EveryChunk);
    EXPECT_EQ(SettlementPolicy::parse("at_expiry_only").kind, SettlementPolicy::Kind::AtExpiryOnly);
    auto lazy = SettlementPolicy::parse("lazy:25");
    EXPECT_EQ(lazy.kind, SettlementPolicy::Kind::Lazy);
    EXPECT_EQ(lazy.threshold, 25u);
    EXPECT_EQ(lazy.to_string(), "lazy:25");
    EXPECT_THROW(SettlementPolicy::parse("lazy:"), std::exception);
    EXPECT_THROW(SettlementPolicy::parse("sometimes"), std::exception);
}

TEST(exchange, honest_delivery)
{
    Swarm s(4, 20, 30, {CacherBehavior::Honest});
    auto& bob = s.cachers[0];
    EXPECT_THROW(request_chunk(s.viewer, bob, 0), Error); // no handshake yet
    switch_peer(s.viewer, bob, s.ledger);
    EXPECT_EQ(request_chunk(s.viewer, bob, 0), ChunkExchangeOutcome::Delivered);
    EXPECT_TRUE(s.viewer.received().contains(0));
    EXPECT_EQ(bob.session(s.viewer_keys.address)->expect.last_amount, 5u);
    EXPECT_EQ(s.viewer.cursor(), 1u);
    try {
        request_chunk(s.viewer, bob, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AlreadyReceived);
    }
}

TEST(exchange, withholding_costs_exactly_one_chunk_value)
{
    Swarm s(4, 20, 30, {CacherBehavior::Withholding, CacherBehavior::Honest});
    auto& mallory = s.cachers[0];
    switch_peer(s.viewer, mallory, s.ledger);
    EXPECT_EQ(request_chunk(s.viewer, mallory, 0), ChunkExchangeOutcome::PaidButUndelivered);
    EXPECT_EQ(s.viewer.undelivered_loss(), 5u);
    EXPECT_EQ(s.viewer.loss_per_peer().at(mallory.id()), 5u);
    EXPECT_FALSE(s.viewer.received().contains(0));

    s.viewer.on_undelivered(mallory.id());
    s.viewer.on_undelivered(mallory.id());
    EXPECT_EQ(s.viewer.blacklist().size(), 1u);
    EXPECT_THROW(request_chunk(s.viewer, mallory, 0), Error);
    EXPECT_THROW(switch_peer(s.viewer, mallory, s.ledger), Error);

    auto& bob = s.cachers[1];
    switch_peer(s.viewer, bob, s.ledger);
    EXPECT_EQ(request_chunk(s.viewer, bob, 0), ChunkExchangeOutcome::Delivered);
    auto active = s.viewer.active_peers();
    ASSERT_EQ(active.size(), 1u);
    EXPECT_EQ(active[0], bob.id());
}

TEST(exchange, rejected_payment_changes_nothing)
{
    Swarm s(4, 20, 30, {CacherBehavior::Honest});
    auto& bob = s.cachers[0];
    switch_peer(s.viewer, bob, s.ledger);
    auto before = s.viewer.view().total_promised();
    auto outcome = request_chunk(s.viewer, bob, 0, [](ServicePayment& sp) { sp.amount += 1; });
    EXPECT_EQ(outcome, ChunkExchangeOutcome::PaymentRejected);
    EXPECT_EQ(s.viewer.view().total_promised(), before);
    EXPECT_EQ(s.viewer.payments_issued(), 0u);
    EXPECT_TRUE(bob.received_payments().empty());
    EXPECT_EQ(request_chunk(s.viewer, bob, 0), ChunkExchangeOutcome::Delivered);
}

TEST(exchange, switching_emits_no_transactions_and_resumes_bookkeeping)
{
    Swarm s(6, 30, 40, {CacherBehavior::Honest, CacherBehavior::Honest});
    auto& bob = s.cachers[0];
    auto& carol = s.cachers[1];
    auto txs_before = s.ledger.total_txs();
    auto mempool_before = s.ledger.mempool_size();

    switch_peer(s.viewer, bob, s.ledger);
    request_chunk(s.viewer, bob, 0);
    request_chunk(s.viewer, bob, 1);
    switch_peer(s.viewer, carol, s.ledger);
    request_chunk(s.viewer, carol, 2);
    switch_peer(s.viewer, bob, s.ledger);
    EXPECT_EQ(request_chunk(s.viewer, bob, 3), ChunkExchangeOutcome::Delivered);

    EXPECT_EQ(s.ledger.mempool_size(), mempool_before);
    s.ledger.commit_block();
    EXPECT_EQ(s.ledger.total_txs(), txs_before);
    EXPECT_EQ(bob.session(s.viewer_keys.address)->expect.last_amount, 15u);
    EXPECT_EQ(carol.session(s.viewer_keys.address)->expect.last_amount, 5u);
    EXPECT_EQ(s.viewer.view().total_promised(), 20u);
}

TEST(exchange, honest_viewer_runs_out_of_deposit)
{
    Swarm s(4, 10, 30, {CacherBehavior::Honest});
    auto& bob = s.cachers[0];
    // The cacher insists the pool cover the whole resource (20), so it refuses.
    EXPECT_THROW(switch_peer(s.viewer, bob, s.ledger), Error);
}

TEST(settlement_policy, fee_overhead_by_policy)
{
    auto every = stream_with_policy({SettlementPolicy::Kind::EveryChunk, 0}, 10);
    auto at_end = stream_with_policy({SettlementPolicy::Kind::AtExpiryOnly, 0}, 10);
    auto lazy = stream_with_policy({SettlementPolicy::Kind::Lazy, 25}, 10);
    EXPECT_EQ(every.earned, 40u);
    EXPECT_EQ(at_end.earned, 49u);
    EXPECT_EQ(lazy.settlements, 2u);
    EXPECT_EQ(lazy.earned, 48u);
    EXPECT_EQ(every.settlements, 10u);
    EXPECT_EQ(at_end.settlements, 1u);
}

TEST(collusion, full_drain_leaves_creator_at_deposit_minus_collateral)
{
    for (Amount collateral : {150u, 101u}) {
        // Only the swarm's chunks and keys are used; the attack runs on its own ledger.
        Swarm s(20, 100, collateral, {CacherBehavior::Honest, CacherBehavior::Honest},
                PayerMode::Adversarial);
        auto edward_keys = test::actor("edward");
        // Edward needs a funded account to pay for his settlement.
        Ledger ledger(LedgerConfig{1, 6},
                      {{s.viewer_keys.address, 100 + collateral},
                       {s.cacher_keys[0].address, 0},
                       {s.cacher_keys[1].address, 0},
                       {edward_keys.address, 1}});
        auto cptx = ledger.submit(
            make_tx(s.viewer_keys, CreatePool{s.manifest.resource_id, 100, collateral, 1000}, 0));
        ledger.commit_block();
        ViewerNode alice(s.viewer_keys, s.manifest, 100, PayerMode::Adversarial);
        alice.attach_pool(cptx);
        CacherNode edward(edward_keys, &s.source, s.manifest, {}, CacherBehavior::ColludingEdward);
        collude_full_drain(ledger, alice, edward, 100);
        ledger.commit_block();
        EXPECT_EQ(ledger.balance(s.viewer_keys.address), 100u);

        // Bob and Carol serve 8 chunks (40 tokens) on the strength of the drained pool.
        CacherNode bob(s.cacher_keys[0], &s.source, s.manifest, all_chunks(20));
        CacherNode carol(s.cacher_keys[1], &s.source, s.manifest, all_chunks(20));
        switch_peer(alice, bob, ledger);
        switch_peer(alice, carol, ledger);
        for (std::size_t i = 0; i < 8; ++i)
            request_chunk(alice, i % 2 ? carol : bob, i);
        bob.settle(ledger, alice.keys().address);
        carol.settle(ledger, alice.keys().address);
        ledger.commit_block();

        EXPECT_EQ(ledger.pool(cptx)->status, PoolStatus::Slashed);
        Amount honest_earned = ledger.balance(bob.id()) + ledger.balance(carol.id());
        EXPECT_LE(honest_earned, 40u); // realized loss of the honest pair is at most 40
        // Creator: 40 worth of chunks, 100 back from Edward, 100 + collateral locked and lost.
        auto net = 40 + static_cast<std::int64_t>(ledger.balance(s.viewer_keys.address)) -
                   static_cast<std::int64_t>(100 + collateral);
        EXPECT_EQ(net, 40 - static_cast<std::int64_t>(collateral));
        EXPECT_TRUE(ledger.audit().balanced());
    }
}
