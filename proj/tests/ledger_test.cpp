#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mpool;
using mpool::test::PoolWorld;
using mpool::test::SettlementModel;

namespace {

std::optional<ErrorCode> error_of(const Ledger& ledger, const Digest32& tx)
{
    return ledger.receipt(tx)->error;
}

} // namespace

TEST(ledger, genesis_block)
{
    PoolWorld w(1, 300);
    EXPECT_EQ(w.ledger.height(), 0u);
    const auto& g = w.ledger.block(0);
    EXPECT_TRUE(g.header.parent_hash.is_zero());
    EXPECT_TRUE(g.header.tx_root.is_zero());
    EXPECT_EQ(w.ledger.balance(w.creator.address), 300u);
    EXPECT_TRUE(w.ledger.audit().balanced());
}

TEST(ledger, submit_rejects_bad_signature_unknown_account_and_duplicates)
{
    PoolWorld w(1, 300);
    auto tx = make_tx(w.creator, Transfer{w.payees[0].address, 5}, 0);
    auto forged = tx;
    forged.signature.bytes[0] ^= 1;
    try {
        w.ledger.submit(forged);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidSignature);
    }

    auto stranger = test::actor("stranger");
    try {
        w.ledger.submit(make_tx(stranger, Transfer{w.creator.address, 1}, 0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownAccount);
    }

    auto h = w.ledger.submit(tx);
    EXPECT_EQ(h, tx.hash());
    try {
        w.ledger.submit(tx);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DuplicateTx);
    }
    w.ledger.commit_block();
    try {
        w.ledger.submit(tx);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DuplicateTx);
    }
}

TEST(ledger, empty_block_advances_height)
{
    PoolWorld w(1, 300);
    const auto& b = w.ledger.commit_block();
    EXPECT_EQ(b.header.height, 1u);
    EXPECT_TRUE(b.txs.empty());
    EXPECT_EQ(b.header.parent_hash, w.ledger.block(0).header.hash());
}

TEST(ledger, block_keeps_submission_order_and_commits_tx_root)
{
    PoolWorld w(3, 300);
    std::vector<Digest32> hashes;
    for (std::size_t i = 0; i < 3; ++i)
        hashes.push_back(w.ledger.submit(
            make_tx(w.creator, Transfer{w.payees[i].address, i + 1}, w.ledger.next_nonce(w.creator.address))));
    const auto& b = w.ledger.commit_block();
    ASSERT_EQ(b.txs.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_EQ(b.txs[i].hash(), hashes[i]);
    EXPECT_EQ(b.header.tx_root, merkle_root(hashes));
}

TEST(ledger, failing_tx_between_valid_ones_is_marked_rejected)
{
    PoolWorld w(2, 10);
    auto a = w.ledger.submit(make_tx(w.creator, Transfer{w.payees[0].address, 4}, 0));
    auto bad = w.ledger.submit(make_tx(w.payees[1], Transfer{w.creator.address, 1}, 0));
    auto c = w.ledger.submit(make_tx(w.creator, Transfer{w.payees[1].address, 6}, 1));
    w.ledger.commit_block();
    EXPECT_TRUE(w.ledger.receipt(a)->ok());
    EXPECT_EQ(error_of(w.ledger, bad), ErrorCode::InsufficientBalance);
    EXPECT_TRUE(w.ledger.receipt(c)->ok());
    EXPECT_EQ(w.ledger.balance(w.creator.address), 0u);
    EXPECT_EQ(w.ledger.balance(w.payees[0].address), 4u);
    EXPECT_EQ(w.ledger.balance(w.payees[1].address), 6u);
    EXPECT_EQ(w.ledger.block(1).txs.size(), 3u);
}

TEST(ledger, create_pool_locks_deposit_and_collateral)
{
    PoolWorld w(1, 300);
    auto r = w.create_pool(100, 150);
    ASSERT_TRUE(r.ok());
    const auto* pool = w.ledger.pool(w.cptx);
    ASSERT_NE(pool, nullptr);
    EXPECT_EQ(pool->status, PoolStatus::Active);
    EXPECT_EQ(pool->remaining_deposit, 100u);
    EXPECT_EQ(pool->create_height, 1u);
    EXPECT_EQ(w.ledger.balance(w.creator.address), 50u);
    EXPECT_EQ(w.cptx, hash(create_pool_signing_bytes(w.creator.public_key, 0,
                                                     CreatePool{hash(as_bytes("resource")), 100, 150, 1000})));
}

TEST(ledger, create_pool_validation)
{
    {
        PoolWorld w(1, 300);
        EXPECT_EQ(w.create_pool(100, 100).error, ErrorCode::CollateralTooSmall);
    }
    {
        PoolWorld w(1, 100);
        EXPECT_EQ(w.create_pool(100, 150).error, ErrorCode::InsufficientBalance);
        EXPECT_EQ(w.ledger.balance(w.creator.address), 100u);
    }
    {
        PoolWorld w(1, 300);
        EXPECT_EQ(w.create_pool(100, 150, 0).error, ErrorCode::ZeroDuration);
    }
}

TEST(ledger, settlement_pays_increment_minus_fee)
{
    PoolWorld w(2, 300);
    w.create_pool(100, 150);
    auto r = w.settle(0, 30, 0);
    ASSERT_TRUE(r.ok());
    ASSERT_TRUE(r.settlement);
    EXPECT_EQ(r.settlement->kind, SettlementOutcome::Kind::Settled);
    EXPECT_EQ(r.settlement->payout, 29u);
    const auto* pool = w.ledger.pool(w.cptx);
    EXPECT_EQ(pool->remaining_deposit, 70u);
    EXPECT_EQ(pool->next_seq(w.payees[0].address), 1u);
    EXPECT_EQ(w.ledger.balance(w.payees[0].address), 29u);

    // Cumulative semantics: a later payment of 45 settles only the 15 increment.
    auto r2 = w.settle(0, 45, 1);
    ASSERT_TRUE(r2.ok());
    EXPECT_EQ(r2.settlement->increment, 15u);
    EXPECT_EQ(w.ledger.balance(w.payees[0].address), 29u + 14u);
    EXPECT_EQ(w.ledger.pool(w.cptx)->remaining_deposit, 55u);
}

TEST(ledger, resubmitted_settlement_is_stale)
{
    PoolWorld w(1, 300);
    w.create_pool(100, 150);
    auto sp = w.pay(0, 30, 0);
    w.submit_settlement(0, sp);
    w.ledger.commit_block();
    auto again = w.submit_settlement(0, sp);
    w.ledger.commit_block();
    EXPECT_EQ(error_of(w.ledger, again), ErrorCode::StaleSequence);
    EXPECT_EQ(w.ledger.balance(w.payees[0].address), 29u);
}

TEST(ledger, double_spend_slashes_and_burns_collateral)
{
    PoolWorld w(2, 300);
    w.create_pool(100, 150);
    auto edward = w.settle(0, 100, 0);
    ASSERT_TRUE(edward.ok());
    EXPECT_EQ(w.ledger.pool(w.cptx)->remaining_deposit, 0u);

    auto bob = w.settle(1, 100, 0);
    ASSERT_TRUE(bob.ok());
    EXPECT_EQ(bob.settlement->kind, SettlementOutcome::Kind::SlashTriggered);
    EXPECT_EQ(bob.settlement->payout, 0u);
    EXPECT_EQ(w.ledger.pool(w.cptx)->status, PoolStatus::Slashed);
    auto audit = w.ledger.audit();
    EXPECT_EQ(audit.burned_slashed, 150u);
    EXPECT_TRUE(audit.balanced());

    auto late = w.settle(1, 110, 1);
    EXPECT_EQ(late.error, ErrorCode::PoolNotActive);
}

TEST(ledger, partial_double_spend_pays_out_what_is_left)
{
    PoolWorld w(2, 300);
    w.create_pool(100, 150);
    w.settle(0, 80, 0);
    auto r = w.settle(1, 40, 0);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.settlement->kind, SettlementOutcome::Kind::SlashTriggered);
    EXPECT_EQ(r.settlement->payout, 19u);
    EXPECT_EQ(w.ledger.balance(w.payees[1].address), 19u);
    EXPECT_TRUE(w.ledger.audit().balanced());
}

TEST(ledger, settlement_error_cases)
{
    PoolWorld w(2, 300);
    w.create_pool(100, 150, 20);

    // wrong submitter: payee 1 submits payee 0's payment
    auto h = w.ledger.submit(make_tx(w.payees[1], Settlement{w.pay(0, 10, 0)}, 0));
    w.ledger.commit_block();
    EXPECT_EQ(error_of(w.ledger, h), ErrorCode::WrongSubmitter);

    // forged creator signature
    auto forged = w.pay(0, 10, 0);
    forged.sigma.bytes[3] ^= 1;
    h = w.submit_settlement(0, forged);
    w.ledger.commit_block();
    EXPECT_EQ(error_of(w.ledger, h), ErrorCode::InvalidSignature);

    // unknown pool
    auto other = sign_service_payment(w.creator.secret_key, w.payees[0].address, 10, hash(as_bytes("nope")), 0);
    h = w.submit_settlement(0, other);
    w.ledger.commit_block();
    EXPECT_EQ(error_of(w.ledger, h), ErrorCode::PoolNotFound);

    // increment not above the fee
    EXPECT_EQ(w.settle(0, 1, 0).error, ErrorCode::UneconomicalSettlement);
    ASSERT_TRUE(w.settle(0, 10, 0).ok());
    EXPECT_EQ(w.settle(0, 10, 1).error, ErrorCode::NonPositiveIncrement);
    EXPECT_EQ(w.settle(0, 20, 5).error, ErrorCode::StaleSequence);

    // time-lock: the pool was created at height 1 with duration 20
    while (w.ledger.height() + 1 < 21)
        w.ledger.commit_block();
    EXPECT_EQ(w.settle(1, 10, 0).error, ErrorCode::TimelockExpired);
}

TEST(ledger, withdraw_expired_pool)
{
    auto withdraw = [](PoolWorld& w, const KeyPair& who) {
        auto h = w.ledger.submit(make_tx(who, WithdrawExpiredPool{w.cptx}, w.ledger.next_nonce(who.address)));
        w.ledger.commit_block();
        return *w.ledger.receipt(h);
    };
    {
        PoolWorld w(1, 300);
        w.create_pool(100, 150, 5);
        EXPECT_EQ(withdraw(w, w.creator).error, ErrorCode::TimelockNotExpired);
        while (w.ledger.height() < 6)
            w.ledger.commit_block();
        EXPECT_EQ(withdraw(w, w.payees[0]).error, ErrorCode::NotCreator);
        auto r = withdraw(w, w.creator);
        ASSERT_TRUE(r.ok());
        EXPECT_EQ(r.refund, 250u);
        EXPECT_EQ(w.ledger.balance(w.creator.address), 300u);
        EXPECT_EQ(w.ledger.pool(w.cptx)->status, PoolStatus::Closed);
        EXPECT_EQ(withdraw(w, w.creator).error, ErrorCode::PoolNotActive);
    }
    {
        PoolWorld w(1, 300);
        w.create_pool(100, 150, 5);
        w.settle(0, 30, 0);
        while (w.ledger.height() < 6)
            w.ledger.commit_block();
        auto r = withdraw(w, w.creator);
        EXPECT_EQ(r.refund, 220u);
    }
    {
        PoolWorld w(2, 300);
        w.create_pool(100, 150, 5);
        w.settle(0, 100, 0);
        w.settle(1, 50, 0);
        while (w.ledger.height() < 6)
            w.ledger.commit_block();
        EXPECT_EQ(withdraw(w, w.creator).error, ErrorCode::PoolNotActive);
    }
}

TEST(ledger, top_up_only_by_creator_and_below_collateral)
{
    PoolWorld w(1, 400);
    w.create_pool(100, 150);
    w.settle(0, 60, 0);
    auto top = [&](const KeyPair& who, Amount amount) {
        auto h = w.ledger.submit(make_tx(who, TopUpPool{w.cptx, amount}, w.ledger.next_nonce(who.address)));
        w.ledger.commit_block();
        return *w.ledger.receipt(h);
    };
    EXPECT_EQ(top(w.payees[0], 10).error, ErrorCode::NotCreator);
    EXPECT_EQ(top(w.creator, 110).error, ErrorCode::CollateralTooSmall);
    ASSERT_TRUE(top(w.creator, 60).ok());
    EXPECT_EQ(w.ledger.pool(w.cptx)->remaining_deposit, 100u);
    EXPECT_TRUE(w.ledger.audit().balanced());
}

TEST(ledger, inclusion_proofs)
{
    PoolWorld w(1, 300);
    auto r = w.create_pool(100, 150);
    auto inc = w.ledger.inclusion(r.tx_hash);
    EXPECT_EQ(inc.header, w.ledger.block(1).header);
    EXPECT_TRUE(merkle_verify(inc.header.tx_root, r.tx_hash, inc.proof));

    auto t = w.ledger.submit_and_commit(make_tx(w.creator, Transfer{w.payees[0].address, 1}, 1));
    EXPECT_FALSE(merkle_verify(w.ledger.block(2).header.tx_root, r.tx_hash, inc.proof));
    EXPECT_TRUE(merkle_verify(w.ledger.block(2).header.tx_root, t.tx_hash, w.ledger.inclusion(t.tx_hash).proof));

    try {
        w.ledger.inclusion(hash(as_bytes("never submitted")));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TxNotCommitted);
    }
}

TEST(ledger, channel_open_and_close)
{
    auto funder = test::actor("funder");
    auto peer = test::actor("peer");
    Ledger ledger(LedgerConfig{1, 6}, {{funder.address, 100}, {peer.address, 0}});
    auto open = ledger.submit_and_commit(make_tx(funder, ChannelOpen{peer.public_key, 50}, 0));
    ASSERT_TRUE(open.ok());
    EXPECT_EQ(ledger.balance(funder.address), 50u);

    auto commit = [&](Amount f, Amount c, std::uint64_t seq) {
        ChannelCommitment m{open.tx_hash, f, c, seq, {}, {}};
        auto bytes = commitment_signing_bytes(m);
        m.funder_sig = sign(funder.secret_key, bytes);
        m.counterparty_sig = sign(peer.secret_key, bytes);
        return m;
    };
    auto close = [&](const ChannelCommitment& m, std::uint64_t nonce) {
        return ledger.submit_and_commit(make_tx(peer, ChannelUpdateClose{m}, nonce));
    };

    EXPECT_EQ(close(commit(20, 29, 3), 0).error, ErrorCode::BalancesDontSum);
    auto ok = close(commit(20, 30, 3), 1);
    ASSERT_TRUE(ok.ok());
    EXPECT_EQ(ledger.balance(peer.address), 29u);
    EXPECT_EQ(ledger.balance(funder.address), 70u);
    EXPECT_EQ(ledger.channel(open.tx_hash)->status, ChannelStatus::Closed);
    EXPECT_EQ(close(commit(10, 40, 3), 2).error, ErrorCode::StaleCommitment);
    EXPECT_EQ(close(commit(10, 40, 4), 3).error, ErrorCode::ChannelNotOpen);
    EXPECT_TRUE(ledger.audit().balanced());
}

TEST(ledger, channel_open_requires_funds)
{
    auto funder = test::actor("funder");
    auto peer = test::actor("peer");
    Ledger ledger(LedgerConfig{1, 6}, {{funder.address, 10}, {peer.address, 0}});
    auto r = ledger.submit_and_commit(make_tx(funder, ChannelOpen{peer.public_key, 50}, 0));
    EXPECT_EQ(r.error, ErrorCode::InsufficientBalance);
}

TEST(ledger, random_settlements_match_model_and_conserve_supply)
{
    std::mt19937_64 rng(7);
    for (int round = 0; round < 100; ++round) {
        auto targets = 2 + rng() % 4;
        Amount deposit = 20 + rng() % 200;
        Amount collateral = deposit + 1 + rng() % 100;
        PoolWorld w(targets, deposit + collateral);
        ASSERT_TRUE(w.create_pool(deposit, collateral).ok());
        SettlementModel model(deposit, collateral, w.fee);
        std::vector<Amount> promised(targets, 0);
        std::vector<std::uint64_t> seq(targets, 0);
        for (int step = 0; step < 12; ++step) {
            auto t = rng() % targets;
            promised[t] += rng() % (deposit / 2 + 1);
            auto r = w.settle(t, promised[t], seq[t]);
            auto expected = model.apply({t, promised[t], seq[t]});
            ASSERT_EQ(r.ok(), expected != SettlementModel::Result::Rejected) << round << ":" << step;
            if (r.ok())
                ++seq[t];
            ASSERT_TRUE(w.ledger.audit().balanced());
        }
        EXPECT_EQ(w.ledger.pool(w.cptx)->status == PoolStatus::Slashed, model.slashed());
        for (std::size_t t = 0; t < targets; ++t)
            EXPECT_EQ(w.ledger.balance(w.payees[t].address), model.balance(t));
        auto a = w.ledger.audit();
        EXPECT_EQ(a.burned_fees + a.burned_slashed, model.burned());
    }
}

TEST(ledger, identical_submissions_give_identical_chains)
{
    auto build = [] {
        PoolWorld w(3, 500);
        w.create_pool(100, 150);
        w.settle(0, 30, 0);
        w.settle(1, 80, 0);
        w.settle(2, 10, 0);
        return std::pair{w.ledger.chain_digest(), w.ledger.dump()};
    };
    auto a = build();
    auto b = build();
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.second, b.second);
}

TEST(ledger, dump_lists_accounts_pools_and_supply)
{
    PoolWorld w(1, 300);
    w.create_pool(100, 150);
    w.settle(0, 30, 0);
    auto dump = w.ledger.dump();
    EXPECT_NE(dump.find("height 2\n"), std::string::npos);
    EXPECT_NE(dump.find("account " + w.creator.address.hex() + " 50\n"), std::string::npos);
    EXPECT_NE(dump.find("account " + w.payees[0].address.hex() + " 29\n"), std::string::npos);
    EXPECT_NE(dump.find("pool " + w.cptx.hex()), std::string::npos);
    EXPECT_NE(dump.find(" 100 70 150 1 1000 Active " + w.payees[0].address.hex() + ":30:1\n"),
              std::string::npos);
    EXPECT_NE(dump.find("supply 300 1 0\n"), std::string::npos);
}

TEST(ledger, tx_counts_include_rejected_txs)
{
    PoolWorld w(1, 300);
    w.create_pool(100, 150);
    w.settle(0, 30, 0);
    w.settle(0, 30, 0);
    auto counts = w.ledger.tx_counts();
    EXPECT_EQ(counts[TxKind::CreatePool], 1u);
    EXPECT_EQ(counts[TxKind::Settlement], 2u);
    EXPECT_EQ(w.ledger.total_txs(), 3u);
}
