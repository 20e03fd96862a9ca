#pragma once

// Single-chain state machine hosting micropayment pools and the two-party
// channels used as a baseline. Transactions are queued with submit() and
// applied in submission order by commit_block(); a transaction that fails
// validation is still included in the block, with a rejected receipt, and
// leaves state untouched.
//
// The ledger is not internally synchronised: one writer drives it (the
// simulator), and readers see committed state between commits.

#include "mpool/crypto.hpp"
#include "mpool/error.hpp"
#include "mpool/service_payment.hpp"

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

namespace mpool {

// ---- transaction payloads -------------------------------------------------

struct CreatePool {
    Digest32 resource_id;
    Amount deposit = 0;
    Amount collateral = 0;
    std::uint64_t duration = 0;
    bool operator==(const CreatePool&) const = default;
};

struct Settlement {
    ServicePayment payment;
    bool operator==(const Settlement&) const = default;
};

struct ChannelOpen {
    PublicKey counterparty_key;
    Amount capacity = 0;
    bool operator==(const ChannelOpen&) const = default;
};

/// Latest balance split of a channel, signed by both parties.
struct ChannelCommitment {
    Digest32 channel_id;
    Amount funder_balance = 0;
    Amount counterparty_balance = 0;
    std::uint64_t seq = 0;
    Signature funder_sig;
    Signature counterparty_sig;
    bool operator==(const ChannelCommitment&) const = default;
};

Bytes commitment_signing_bytes(const Digest32& channel_id, Amount funder_balance,
                               Amount counterparty_balance, std::uint64_t seq);
inline Bytes commitment_signing_bytes(const ChannelCommitment& c)
{
    return commitment_signing_bytes(c.channel_id, c.funder_balance, c.counterparty_balance, c.seq);
}

struct ChannelUpdateClose {
    ChannelCommitment commitment;
    bool operator==(const ChannelUpdateClose&) const = default;
};

struct Transfer {
    Address to;
    Amount amount = 0;
    bool operator==(const Transfer&) const = default;
};

struct WithdrawExpiredPool {
    Digest32 pool_key;
    bool operator==(const WithdrawExpiredPool&) const = default;
};

/// Refills a live-stream pool's remaining deposit. Only the creator may
/// submit it, and the resulting remaining deposit must stay below the
/// collateral.
struct TopUpPool {
    Digest32 pool_key;
    Amount amount = 0;
    bool operator==(const TopUpPool&) const = default;
};

enum class TxKind : std::uint8_t {
    CreatePool = 1,
    Settlement = 2,
    ChannelOpen = 3,
    ChannelUpdateClose = 4,
    Transfer = 5,
    WithdrawExpiredPool = 6,
    TopUpPool = 7,
};

std::string_view to_string(TxKind kind) noexcept;

using TxPayload = std::variant<CreatePool, Settlement, ChannelOpen, ChannelUpdateClose, Transfer,
                               WithdrawExpiredPool, TopUpPool>;

struct OnChainTx {
    TxPayload payload;
    PublicKey submitter_key;
    std::uint64_t nonce = 0;
    Signature signature;

    TxKind kind() const noexcept;
    Address submitter() const { return address_of(submitter_key); }
    /// tag || submitterKey || nonce || payload. The signature is excluded, so
    /// the tx hash is known before signing.
    Bytes signing_bytes() const;
    Digest32 hash() const { return mpool::hash(signing_bytes()); }

    bool operator==(const OnChainTx&) const = default;
};

OnChainTx make_tx(const KeyPair& submitter, TxPayload payload, std::uint64_t nonce);

/// Canonical bytes of a CreatePool tx; hashing them yields the cptxHash.
Bytes create_pool_signing_bytes(const PublicKey& creator, std::uint64_t nonce,
                                const CreatePool& terms);

// ---- chain ----------------------------------------------------------------

struct BlockHeader {
    Height height = 0;
    Digest32 parent_hash;
    Digest32 tx_root;

    Digest32 hash() const;
    bool operator==(const BlockHeader&) const = default;
};

struct SettlementOutcome {
    enum class Kind { Settled, SlashTriggered };
    Kind kind = Kind::Settled;
    Amount increment = 0;
    Amount payout = 0;
    bool operator==(const SettlementOutcome&) const = default;
};

struct Receipt {
    Digest32 tx_hash;
    TxKind kind = TxKind::Transfer;
    Height height = 0;
    std::optional<ErrorCode> error;
    std::optional<SettlementOutcome> settlement;
    /// WithdrawExpiredPool refund.
    Amount refund = 0;

    bool ok() const noexcept { return !error.has_value(); }
};

struct Block {
    BlockHeader header;
    std::vector<OnChainTx> txs;
    std::vector<Receipt> receipts;
};

struct TxInclusion {
    BlockHeader header;
    MerkleProof proof;
};

// ---- state ----------------------------------------------------------------

enum class PoolStatus { Active, Slashed, Closed };
std::string_view to_string(PoolStatus s) noexcept;

struct PoolState {
    Digest32 key; // cptxHash
    Address creator;
    PublicKey creator_key;
    Digest32 resource_id;
    Amount deposit = 0;
    Amount remaining_deposit = 0;
    Amount collateral = 0;
    Height create_height = 0;
    std::uint64_t duration = 0;
    PoolStatus status = PoolStatus::Active;
    std::map<Address, Amount> settled_per_target;
    std::map<Address, std::uint64_t> seq_per_target;

    Height expiry_height() const noexcept { return create_height + duration; }
    Amount settled(const Address& target) const;
    std::uint64_t next_seq(const Address& target) const;
};

enum class ChannelStatus { Open, Closed };

struct ChannelRecord {
    Digest32 id; // hash of the ChannelOpen tx
    Address funder;
    PublicKey funder_key;
    Address counterparty;
    PublicKey counterparty_key;
    Amount capacity = 0;
    Height open_height = 0;
    ChannelStatus status = ChannelStatus::Open;
    std::optional<std::uint64_t> last_seq;
};

struct LedgerConfig {
    Amount settlement_gas_fee = 1;
    Height confirmation_depth = 6;
};

/// Where every token of the initial supply currently sits. Fees and
/// slashed collateral are burned.
struct SupplyAudit {
    Amount total_supply = 0;
    Amount balances = 0;
    Amount pool_locked = 0;
    Amount channel_locked = 0;
    Amount burned_fees = 0;
    Amount burned_slashed = 0;

    Amount accounted() const noexcept
    {
        return balances + pool_locked + channel_locked + burned_fees + burned_slashed;
    }
    bool balanced() const noexcept { return accounted() == total_supply; }
};

class Ledger {
public:
    using Genesis = std::vector<std::pair<Address, Amount>>;

    /// Throws Error(InvalidConfig) if the fee/depth invariants are violated.
    Ledger(LedgerConfig config, const Genesis& genesis);

    /// Mempool admission. Throws InvalidSignature, UnknownAccount or
    /// DuplicateTx.
    Digest32 submit(OnChainTx tx);
    const Block& commit_block();
    /// submit + commit_block, returning the tx's receipt.
    Receipt submit_and_commit(OnChainTx tx);

    const LedgerConfig& config() const noexcept { return config_; }
    Height height() const noexcept { return blocks_.back().header.height; }
    const Block& block(Height h) const { return blocks_.at(h); }
    const std::vector<Block>& blocks() const noexcept { return blocks_; }
    std::vector<BlockHeader> headers() const;
    std::size_t mempool_size() const noexcept { return mempool_.size(); }

    bool has_account(const Address& a) const { return balances_.contains(a); }
    Amount balance(const Address& a) const;
    /// Next unused nonce for `a`, counting queued transactions.
    std::uint64_t next_nonce(const Address& a) const;

    const PoolState* pool(const Digest32& key) const;
    const ChannelRecord* channel(const Digest32& id) const;
    const std::map<Digest32, PoolState>& pools() const noexcept { return pools_; }
    const std::map<Digest32, ChannelRecord>& channels() const noexcept { return channels_; }

    /// Latest receipt for a tx hash, if it was ever included.
    const Receipt* receipt(const Digest32& tx_hash) const;
    /// Throws Error(TxNotCommitted).
    TxInclusion inclusion(const Digest32& tx_hash) const;
    bool is_committed(const Digest32& tx_hash) const { return included_at_.contains(tx_hash); }

    /// Number of included txs per kind, rejected ones counted too.
    std::map<TxKind, std::uint64_t> tx_counts() const;
    std::uint64_t total_txs() const;

    SupplyAudit audit() const;
    /// Line-oriented dump of accounts, pools, channels and supply.
    std::string dump() const;
    /// Hash over every block header; equal for byte-identical chains.
    Digest32 chain_digest() const;

private:
    Receipt apply(const OnChainTx& tx, Height h);

    void apply_create_pool(const OnChainTx& tx, const CreatePool& p, Height h);
    SettlementOutcome apply_settlement(const OnChainTx& tx, const Settlement& s, Height h);
    Amount apply_withdraw(const OnChainTx& tx, const WithdrawExpiredPool& w, Height h);
    void apply_top_up(const OnChainTx& tx, const TopUpPool& t);
    void apply_channel_open(const OnChainTx& tx, const ChannelOpen& o, Height h);
    void apply_channel_close(const OnChainTx& tx, const ChannelUpdateClose& c);
    void apply_transfer(const OnChainTx& tx, const Transfer& t);

    void debit(const Address& a, Amount v);
    void credit(const Address& a, Amount v);

    LedgerConfig config_;
    Amount total_supply_ = 0;
    Amount burned_fees_ = 0;
    Amount burned_slashed_ = 0;

    std::map<Address, Amount> balances_;
    std::map<Digest32, PoolState> pools_;
    std::map<Digest32, ChannelRecord> channels_;

    std::vector<OnChainTx> mempool_;
    std::unordered_set<Digest32> mempool_hashes_;
    std::unordered_set<Digest32> applied_hashes_;
    std::unordered_map<Address, std::uint64_t> nonces_;

    std::vector<Block> blocks_;
    std::unordered_map<Digest32, std::pair<Height, std::size_t>> included_at_;
    std::unordered_map<Digest32, Receipt> receipts_;
};

} // namespace mpool
