#include "mpool/ledger.hpp"

#include <numeric>
#include <sstream>

namespace mpool {

std::string_view to_string(TxKind kind) noexcept
{
    switch (kind) {
    case TxKind::CreatePool: return "CreatePool";
    case TxKind::Settlement: return "Settlement";
    case TxKind::ChannelOpen: return "ChannelOpen";
    case TxKind::ChannelUpdateClose: return "ChannelUpdateClose";
    case TxKind::Transfer: return "Transfer";
    case TxKind::WithdrawExpiredPool: return "WithdrawExpiredPool";
    case TxKind::TopUpPool: return "TopUpPool";
    }
    return "Unknown";
}

std::string_view to_string(PoolStatus s) noexcept
{
    switch (s) {
    case PoolStatus::Active: return "Active";
    case PoolStatus::Slashed: return "Slashed";
    case PoolStatus::Closed: return "Closed";
    }
    return "Unknown";
}

Bytes commitment_signing_bytes(const Digest32& channel_id, Amount funder_balance,
                               Amount counterparty_balance, std::uint64_t seq)
{
    return ByteWriter()
        .u8(0x10)
        .raw(channel_id.bytes)
        .u64(funder_balance)
        .u64(counterparty_balance)
        .u64(seq)
        .bytes();
}

namespace {

struct PayloadEncoder {
    ByteWriter& w;

    void operator()(const CreatePool& p)
    {
        w.raw(p.resource_id.bytes).u64(p.deposit).u64(p.collateral).u64(p.duration);
    }
    void operator()(const Settlement& s)
    {
        w.raw(serialize_for_signing(s.payment)).raw(s.payment.sigma.bytes);
    }
    void operator()(const ChannelOpen& o) { w.raw(o.counterparty_key.bytes).u64(o.capacity); }
    void operator()(const ChannelUpdateClose& c)
    {
        const auto& m = c.commitment;
        w.raw(m.channel_id.bytes)
            .u64(m.funder_balance)
            .u64(m.counterparty_balance)
            .u64(m.seq)
            .raw(m.funder_sig.bytes)
            .raw(m.counterparty_sig.bytes);
    }
    void operator()(const Transfer& t) { w.raw(t.to.bytes).u64(t.amount); }
    void operator()(const WithdrawExpiredPool& x) { w.raw(x.pool_key.bytes); }
    void operator()(const TopUpPool& t) { w.raw(t.pool_key.bytes).u64(t.amount); }
};

Bytes tx_signing_bytes(TxKind kind, const PublicKey& key, std::uint64_t nonce,
                       const TxPayload& payload)
{
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(kind)).raw(key.bytes).u64(nonce);
    std::visit(PayloadEncoder{w}, payload);
    return std::move(w).bytes();
}

} // namespace

TxKind OnChainTx::kind() const noexcept
{
    return static_cast<TxKind>(payload.index() + 1);
}

Bytes OnChainTx::signing_bytes() const
{
    return tx_signing_bytes(kind(), submitter_key, nonce, payload);
}

OnChainTx make_tx(const KeyPair& submitter, TxPayload payload, std::uint64_t nonce)
{
    OnChainTx tx{std::move(payload), submitter.public_key, nonce, {}};
    tx.signature = sign(submitter.secret_key, tx.signing_bytes());
    return tx;
}

Bytes create_pool_signing_bytes(const PublicKey& creator, std::uint64_t nonce,
                                const CreatePool& terms)
{
    return tx_signing_bytes(TxKind::CreatePool, creator, nonce, terms);
}

Digest32 BlockHeader::hash() const
{
    return mpool::hash(ByteWriter().u64(height).raw(parent_hash.bytes).raw(tx_root.bytes).bytes());
}

Amount PoolState::settled(const Address& target) const
{
    auto it = settled_per_target.find(target);
    return it == settled_per_target.end() ? 0 : it->second;
}

std::uint64_t PoolState::next_seq(const Address& target) const
{
    auto it = seq_per_target.find(target);
    return it == seq_per_target.end() ? 0 : it->second;
}

// ---------------------------------------------------------------------------

Ledger::Ledger(LedgerConfig config, const Genesis& genesis) : config_(config)
{
    if (config_.confirmation_depth < 1)
        throw Error(ErrorCode::InvalidConfig, "confirmation depth must be at least 1");
    for (const auto& [addr, amount] : genesis) {
        balances_[addr] += amount;
        total_supply_ += amount;
    }
    blocks_.push_back(Block{BlockHeader{0, Digest32{}, Digest32{}}, {}, {}});
}

Digest32 Ledger::submit(OnChainTx tx)
{
    if (!verify(tx.submitter_key, tx.signing_bytes(), tx.signature))
        throw Error(ErrorCode::InvalidSignature, "submitter signature does not verify");
    auto submitter = tx.submitter();
    if (!has_account(submitter))
        throw Error(ErrorCode::UnknownAccount, "unknown submitter " + submitter.hex());

    auto h = tx.hash();
    if (mempool_hashes_.contains(h))
        throw Error(ErrorCode::DuplicateTx, "tx already queued");
    // Settlements and channel closes are replay-guarded by their own
    // sequence numbers; everything else is guarded by its hash.
    bool sequenced = tx.kind() == TxKind::Settlement || tx.kind() == TxKind::ChannelUpdateClose;
    if (!sequenced && applied_hashes_.contains(h))
        throw Error(ErrorCode::DuplicateTx, "tx already applied");

    auto& next = nonces_[submitter];
    next = std::max(next, tx.nonce + 1);
    mempool_hashes_.insert(h);
    mempool_.push_back(std::move(tx));
    return h;
}

const Block& Ledger::commit_block()
{
    Block block;
    block.header.height = height() + 1;
    block.header.parent_hash = blocks_.back().header.hash();

    std::vector<Digest32> leaves;
    leaves.reserve(mempool_.size());
    for (auto& tx : mempool_) {
        auto receipt = apply(tx, block.header.height);
        leaves.push_back(receipt.tx_hash);
        if (!included_at_.contains(receipt.tx_hash))
            included_at_.emplace(receipt.tx_hash, std::pair{block.header.height, block.txs.size()});
        receipts_[receipt.tx_hash] = receipt;
        block.receipts.push_back(std::move(receipt));
        block.txs.push_back(std::move(tx));
    }
    block.header.tx_root = leaves.empty() ? Digest32{} : merkle_root(leaves);

    mempool_.clear();
    mempool_hashes_.clear();
    blocks_.push_back(std::move(block));
    return blocks_.back();
}

Receipt Ledger::submit_and_commit(OnChainTx tx)
{
    auto h = submit(std::move(tx));
    commit_block();
    return receipts_.at(h);
}

Receipt Ledger::apply(const OnChainTx& tx, Height h)
{
    Receipt r;
    r.tx_hash = tx.hash();
    r.kind = tx.kind();
    r.height = h;

    bool sequenced = r.kind == TxKind::Settlement || r.kind == TxKind::ChannelUpdateClose;
    try {
        if (!sequenced && applied_hashes_.contains(r.tx_hash))
            throw Error(ErrorCode::DuplicateTx);
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, CreatePool>)
                    apply_create_pool(tx, p, h);
                else if constexpr (std::is_same_v<T, Settlement>)
                    r.settlement = apply_settlement(tx, p, h);
                else if constexpr (std::is_same_v<T, ChannelOpen>)
                    apply_channel_open(tx, p, h);
                else if constexpr (std::is_same_v<T, ChannelUpdateClose>)
                    apply_channel_close(tx, p);
                else if constexpr (std::is_same_v<T, Transfer>)
                    apply_transfer(tx, p);
                else if constexpr (std::is_same_v<T, WithdrawExpiredPool>)
                    r.refund = apply_withdraw(tx, p, h);
                else
                    apply_top_up(tx, p);
            },
            tx.payload);
        applied_hashes_.insert(r.tx_hash);
    } catch (const Error& e) {
        r.error = e.code();
    }
    return r;
}

void Ledger::debit(const Address& a, Amount v)
{
    auto it = balances_.find(a);
    if (it == balances_.end() || it->second < v)
        throw Error(ErrorCode::InsufficientBalance);
    it->second -= v;
}

void Ledger::credit(const Address& a, Amount v)
{
    balances_[a] += v;
}

void Ledger::apply_create_pool(const OnChainTx& tx, const CreatePool& p, Height h)
{
    if (p.duration == 0)
        throw Error(ErrorCode::ZeroDuration);
    if (p.collateral <= p.deposit)
        throw Error(ErrorCode::CollateralTooSmall, "collateral must exceed deposit");
    auto creator = tx.submitter();
    if (balance(creator) < p.deposit + p.collateral)
        throw Error(ErrorCode::InsufficientBalance);

    debit(creator, p.deposit + p.collateral);
    PoolState pool;
    pool.key = tx.hash();
    pool.creator = creator;
    pool.creator_key = tx.submitter_key;
    pool.resource_id = p.resource_id;
    pool.deposit = p.deposit;
    pool.remaining_deposit = p.deposit;
    pool.collateral = p.collateral;
    pool.create_height = h;
    pool.duration = p.duration;
    pools_.emplace(pool.key, std::move(pool));
}

SettlementOutcome Ledger::apply_settlement(const OnChainTx& tx, const Settlement& s, Height h)
{
    const auto& sp = s.payment;
    auto it = pools_.find(sp.cptx_hash);
    if (it == pools_.end())
        throw Error(ErrorCode::PoolNotFound);
    auto& pool = it->second;

    if (sp.target != tx.submitter())
        throw Error(ErrorCode::WrongSubmitter, "only the payment target may settle");
    if (!signature_valid(sp, pool.creator_key))
        throw Error(ErrorCode::InvalidSignature, "payment not signed by pool creator");
    // Checked before status so that every replay of an applied settlement is
    // reported as stale, whatever happened to the pool since.
    if (sp.tgt_seq != pool.next_seq(sp.target))
        throw Error(ErrorCode::StaleSequence);
    if (pool.status != PoolStatus::Active)
        throw Error(ErrorCode::PoolNotActive);
    if (h >= pool.expiry_height())
        throw Error(ErrorCode::TimelockExpired);

    auto already = pool.settled(sp.target);
    if (sp.amount <= already)
        throw Error(ErrorCode::NonPositiveIncrement);
    auto increment = sp.amount - already;
    auto fee = config_.settlement_gas_fee;
    if (increment <= fee)
        throw Error(ErrorCode::UneconomicalSettlement);

    SettlementOutcome out;
    out.increment = increment;
    if (increment <= pool.remaining_deposit) {
        out.kind = SettlementOutcome::Kind::Settled;
        out.payout = increment - fee;
        pool.remaining_deposit -= increment;
        pool.settled_per_target[sp.target] += increment;
        burned_fees_ += fee;
    } else {
        // The remaining deposit cannot cover this consolidated payment: the
        // creator promised more than it locked.
        auto remaining = pool.remaining_deposit;
        out.kind = SettlementOutcome::Kind::SlashTriggered;
        out.payout = remaining > fee ? remaining - fee : 0;
        burned_fees_ += remaining - out.payout;
        burned_slashed_ += pool.collateral;
        pool.settled_per_target[sp.target] += remaining;
        pool.remaining_deposit = 0;
        pool.status = PoolStatus::Slashed;
    }
    pool.seq_per_target[sp.target] += 1;
    credit(sp.target, out.payout);
    return out;
}

Amount Ledger::apply_withdraw(const OnChainTx& tx, const WithdrawExpiredPool& w, Height h)
{
    auto it = pools_.find(w.pool_key);
    if (it == pools_.end())
        throw Error(ErrorCode::PoolNotFound);
    auto& pool = it->second;
    if (tx.submitter() != pool.creator)
        throw Error(ErrorCode::NotCreator);
    if (pool.status != PoolStatus::Active)
        throw Error(ErrorCode::PoolNotActive);
    if (h < pool.expiry_height())
        throw Error(ErrorCode::TimelockNotExpired);

    auto refund = pool.remaining_deposit + pool.collateral;
    pool.status = PoolStatus::Closed;
    credit(pool.creator, refund);
    return refund;
}

void Ledger::apply_top_up(const OnChainTx& tx, const TopUpPool& t)
{
    auto it = pools_.find(t.pool_key);
    if (it == pools_.end())
        throw Error(ErrorCode::PoolNotFound);
    auto& pool = it->second;
    if (tx.submitter() != pool.creator)
        throw Error(ErrorCode::NotCreator);
    if (pool.status != PoolStatus::Active)
        throw Error(ErrorCode::PoolNotActive);
    if (pool.remaining_deposit + t.amount >= pool.collateral)
        throw Error(ErrorCode::CollateralTooSmall, "top-up would leave collateral <= deposit");
    debit(pool.creator, t.amount);
    pool.deposit += t.amount;
    pool.remaining_deposit += t.amount;
}

void Ledger::apply_channel_open(const OnChainTx& tx, const ChannelOpen& o, Height h)
{
    auto funder = tx.submitter();
    debit(funder, o.capacity);
    ChannelRecord ch;
    ch.id = tx.hash();
    ch.funder = funder;
    ch.funder_key = tx.submitter_key;
    ch.counterparty = address_of(o.counterparty_key);
    ch.counterparty_key = o.counterparty_key;
    ch.capacity = o.capacity;
    ch.open_height = h;
    channels_.emplace(ch.id, std::move(ch));
}

void Ledger::apply_channel_close(const OnChainTx& tx, const ChannelUpdateClose& c)
{
    const auto& m = c.commitment;
    auto it = channels_.find(m.channel_id);
    if (it == channels_.end())
        throw Error(ErrorCode::ChannelNotFound);
    auto& ch = it->second;
    if (ch.last_seq && m.seq <= *ch.last_seq)
        throw Error(ErrorCode::StaleCommitment);
    if (ch.status != ChannelStatus::Open)
        throw Error(ErrorCode::ChannelNotOpen);
    if (m.funder_balance + m.counterparty_balance != ch.capacity)
        throw Error(ErrorCode::BalancesDontSum);
    auto bytes = commitment_signing_bytes(m);
    if (!verify(ch.funder_key, bytes, m.funder_sig) ||
        !verify(ch.counterparty_key, bytes, m.counterparty_sig))
        throw Error(ErrorCode::InvalidSignature, "commitment lacks both signatures");

    auto closer = tx.submitter();
    if (closer != ch.funder && closer != ch.counterparty)
        throw Error(ErrorCode::WrongSubmitter, "only a channel party may close");
    auto closer_share = closer == ch.funder ? m.funder_balance : m.counterparty_balance;
    auto fee = config_.settlement_gas_fee;
    if (balance(closer) + closer_share < fee)
        throw Error(ErrorCode::InsufficientBalance, "closer cannot cover the settlement fee");

    credit(ch.funder, m.funder_balance);
    credit(ch.counterparty, m.counterparty_balance);
    debit(closer, fee);
    burned_fees_ += fee;
    ch.status = ChannelStatus::Closed;
    ch.last_seq = m.seq;
}

void Ledger::apply_transfer(const OnChainTx& tx, const Transfer& t)
{
    debit(tx.submitter(), t.amount);
    credit(t.to, t.amount);
}

// ---------------------------------------------------------------------------

std::vector<BlockHeader> Ledger::headers() const
{
    std::vector<BlockHeader> out;
    out.reserve(blocks_.size());
    for (const auto& b : blocks_)
        out.push_back(b.header);
    return out;
}

Amount Ledger::balance(const Address& a) const
{
    auto it = balances_.find(a);
    return it == balances_.end() ? 0 : it->second;
}

std::uint64_t Ledger::next_nonce(const Address& a) const
{
    auto it = nonces_.find(a);
    return it == nonces_.end() ? 0 : it->second;
}

const PoolState* Ledger::pool(const Digest32& key) const
{
    auto it = pools_.find(key);
    return it == pools_.end() ? nullptr : &it->second;
}

const ChannelRecord* Ledger::channel(const Digest32& id) const
{
    auto it = channels_.find(id);
    return it == channels_.end() ? nullptr : &it->second;
}

const Receipt* Ledger::receipt(const Digest32& tx_hash) const
{
    auto it = receipts_.find(tx_hash);
    return it == receipts_.end() ? nullptr : &it->second;
}

TxInclusion Ledger::inclusion(const Digest32& tx_hash) const
{
    auto it = included_at_.find(tx_hash);
    if (it == included_at_.end())
        throw Error(ErrorCode::TxNotCommitted, "tx " + tx_hash.hex() + " not committed");
    const auto& block = blocks_.at(it->second.first);
    std::vector<Digest32> leaves;
    leaves.reserve(block.receipts.size());
    for (const auto& r : block.receipts)
        leaves.push_back(r.tx_hash);
    return {block.header, merkle_prove(leaves, it->second.second)};
}

std::map<TxKind, std::uint64_t> Ledger::tx_counts() const
{
    std::map<TxKind, std::uint64_t> out;
    for (const auto& b : blocks_)
        for (const auto& tx : b.txs)
            ++out[tx.kind()];
    return out;
}

std::uint64_t Ledger::total_txs() const
{
    std::uint64_t n = 0;
    for (const auto& b : blocks_)
        n += b.txs.size();
    return n;
}

SupplyAudit Ledger::audit() const
{
    SupplyAudit a;
    a.total_supply = total_supply_;
    for (const auto& [_, v] : balances_)
        a.balances += v;
    for (const auto& [_, p] : pools_)
        if (p.status == PoolStatus::Active)
            a.pool_locked += p.remaining_deposit + p.collateral;
    for (const auto& [_, c] : channels_)
        if (c.status == ChannelStatus::Open)
            a.channel_locked += c.capacity;
    a.burned_fees = burned_fees_;
    a.burned_slashed = burned_slashed_;
    return a;
}

std::string Ledger::dump() const
{
    std::ostringstream out;
    out << "height " << height() << '\n';
    for (const auto& [addr, bal] : balances_)
        out << "account " << addr.hex() << ' ' << bal << '\n';
    for (const auto& [key, p] : pools_) {
        out << "pool " << key.hex() << ' ' << p.creator.hex() << ' ' << p.resource_id.hex() << ' '
            << p.deposit << ' ' << p.remaining_deposit << ' ' << p.collateral << ' '
            << p.create_height << ' ' << p.duration << ' ' << to_string(p.status);
        for (const auto& [target, amount] : p.settled_per_target)
            out << ' ' << target.hex() << ':' << amount << ':' << p.next_seq(target);
        out << '\n';
    }
    for (const auto& [id, c] : channels_) {
        out << "channel " << id.hex() << ' ' << c.funder.hex() << ' ' << c.counterparty.hex() << ' '
            << c.capacity << ' ' << c.open_height << ' '
            << (c.status == ChannelStatus::Open ? "Open" : "Closed") << ' ';
        if (c.last_seq)
            out << *c.last_seq;
        else
            out << '-';
        out << '\n';
    }
    auto a = audit();
    out << "supply " << a.total_supply << ' ' << a.burned_fees << ' ' << a.burned_slashed << '\n';
    return out.str();
}

Digest32 Ledger::chain_digest() const
{
    ByteWriter w;
    for (const auto& b : blocks_)
        w.raw(b.header.hash().bytes);
    return mpool::hash(w.bytes());
}

} // namespace mpool
