#pragma once

// Off-chain message layer between a pool creator (payer) and its peers.
//
// Wire format: every message starts with a one-byte type tag followed by the
// canonical encoding described in docs/wire-format.md.

#include "mpool/ledger.hpp"
#include "mpool/service_payment.hpp"

#include <map>
#include <optional>
#include <span>

namespace mpool {

enum class MessageTag : std::uint8_t {
    ServicePayment = 0x01,
    HandshakePacket = 0x02,
    ServiceReceipt = 0x03,
    AuthCertificate = 0x04,
    AccumulatedPayment = 0x05,
};

// ---- payer bookkeeping ----------------------------------------------------

enum class PayerMode { Honest, Adversarial };

struct TargetAccount {
    Amount cumulative_amount = 0;
    std::uint64_t next_tgt_seq = 0;
};

/// What a payer has promised so far, per target.
class PayerLedgerView {
public:
    explicit PayerLedgerView(Amount deposit = 0) : deposit_(deposit) {}

    Amount deposit() const noexcept { return deposit_; }
    Amount total_promised() const noexcept { return total_promised_; }
    const TargetAccount& target(const Address& a) const;
    const std::map<Address, TargetAccount>& targets() const noexcept { return per_target_; }

    /// Records an amount promised to `target`.
    void record_payment(const Address& target, Amount increment);
    /// The target published its latest payment on-chain; the next payment
    /// to it must carry the following sequence number.
    void note_settlement(const Address& target);
    /// Live-stream top-ups raise the cap.
    void raise_deposit(Amount extra) { deposit_ += extra; }

private:
    Amount deposit_;
    Amount total_promised_ = 0;
    std::map<Address, TargetAccount> per_target_;
};

/// Signs the successor payment for `target`, `chunk_value` above the last
/// one, and records it in `view`. In honest mode throws
/// Error(DepositExhausted) rather than promise more than the deposit.
ServicePayment next_service_payment(PayerLedgerView& view, const KeyPair& creator,
                                    const Address& target, const Digest32& cptx_hash,
                                    Amount chunk_value, PayerMode mode = PayerMode::Honest);

// ---- payee-side verification ---------------------------------------------

struct PayeeExpectation {
    Digest32 expected_cptx_hash;
    Amount last_amount = 0;
    std::uint64_t expected_tgt_seq = 0;
    Amount chunk_value = 0;
};

enum class PaymentReject { BadSignature, WrongPool, WrongSequence, WrongAmount };
std::string_view to_string(PaymentReject r) noexcept;

/// std::nullopt means accept.
std::optional<PaymentReject> verify_service_payment(const ServicePayment& sp,
                                                    const PublicKey& creator_key,
                                                    const PayeeExpectation& expect);

// ---- handshake ------------------------------------------------------------

struct PoolTerms {
    Digest32 resource_id;
    Amount deposit = 0;
    Amount collateral = 0;
    std::uint64_t duration = 0;
    Height create_height = 0;
    bool operator==(const PoolTerms&) const = default;
};

/// Sent by the pool creator to a new peer. The peer recomputes the CreatePool
/// tx hash from `terms`, `creator_key` and `creator_nonce`, so the terms are
/// bound by the inclusion proof.
struct HandshakePacket {
    Digest32 cptx_hash;
    BlockHeader header;
    MerkleProof inclusion_proof;
    PoolTerms terms;
    PublicKey creator_key;
    std::uint64_t creator_nonce = 0;

    bool operator==(const HandshakePacket&) const = default;
};

struct HandshakeExpectation {
    Digest32 resource_id;
    Amount min_deposit = 0;
    Amount min_collateral = 0;
    Height current_height = 0;
};

enum class HandshakeReject { BadProof, ResourceMismatch, DepositTooSmall, CollateralTooSmall, Expired };
std::string_view to_string(HandshakeReject r) noexcept;

/// Throws Error(TxNotCommitted) if the pool's CreatePool tx is not on chain.
HandshakePacket build_handshake(const Ledger& ledger, const Digest32& cptx_hash);

/// `trusted_headers` is the verifier's own header chain, indexed by height.
std::optional<HandshakeReject> verify_handshake(const HandshakePacket& packet,
                                                const HandshakeExpectation& expect,
                                                std::span<const BlockHeader> trusted_headers);

// ---- wire codecs ----------------------------------------------------------

Bytes encode(const ServicePayment& sp);
Bytes encode(const HandshakePacket& packet);
/// Throw Error(DecodeError) on a wrong tag, truncation or trailing bytes.
ServicePayment decode_service_payment(ByteView wire);
HandshakePacket decode_handshake(ByteView wire);

void write_header(ByteWriter& w, const BlockHeader& h);
BlockHeader read_header(ByteReader& r);
void write_proof(ByteWriter& w, const MerkleProof& p);
MerkleProof read_proof(ByteReader& r);

} // namespace mpool
