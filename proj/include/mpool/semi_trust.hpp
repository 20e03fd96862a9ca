#pragma once

// Platform-funded pool variant. A tracker authorizes (sharer, receiver)
// pairs, receivers sign cumulative ServiceReceipts for the data they got,
// and the Payment Service turns verified receipts into platform-signed
// AccumulatedPayments that sharers settle through the ordinary pool
// machinery of the ledger.

#include "mpool/protocol.hpp"

#include <map>
#include <optional>

namespace mpool {

struct AuthCertificate {
    Address sharer;
    Address receiver;
    Height valid_from = 0;
    Height valid_until = 0; // inclusive
    Signature tracker_signature;

    bool operator==(const AuthCertificate&) const = default;
};

Bytes cert_signing_bytes(const AuthCertificate& cert);

/// Certificates for each (sharer, other peer) pair. An empty `sharers` list
/// makes every peer a sharer. Throws Error(TooFewPeers) for fewer than two
/// peers.
std::vector<AuthCertificate> tracker_group_peers(const KeyPair& tracker,
                                                 std::span<const Address> peers,
                                                 std::span<const Address> sharers,
                                                 Height valid_from, Height valid_until);

struct ServiceReceipt {
    PublicKey signer_key; // the viewer who received data
    Address beneficiary;  // the sharer who served it
    Digest32 resource_id;
    Amount cumulative_amount = 0;
    std::uint64_t receipt_seq = 0;
    Signature signature;

    Address signer() const { return address_of(signer_key); }
    bool operator==(const ServiceReceipt&) const = default;
};

Bytes receipt_signing_bytes(const ServiceReceipt& r);

/// A viewer's running receipt counters, one per beneficiary.
class ReceiptBook {
public:
    /// Throws Error(NonMonotoneAmount) unless `new_cumulative` exceeds the
    /// previous receipt for this beneficiary.
    ServiceReceipt sign(const KeyPair& viewer, const Address& beneficiary,
                        const Digest32& resource_id, Amount new_cumulative);
    Amount last_amount(const Address& beneficiary) const;

private:
    struct Counter {
        Amount amount = 0;
        std::uint64_t next_seq = 0;
    };
    std::map<Address, Counter> counters_;
};

struct AccumulatedPayment {
    Address target_address;
    Amount transfer_amount = 0;
    Digest32 create_pool_tx_hash;
    std::uint64_t target_settlement_sequence = 0;
    Signature platform_signature;

    /// Same signing layout as a ServicePayment, so it settles as one.
    ServicePayment as_service_payment() const
    {
        return {target_address, transfer_amount, create_pool_tx_hash, target_settlement_sequence,
                platform_signature};
    }
    bool operator==(const AccumulatedPayment&) const = default;
};

/// Submits the platform's CreatePool tx. With `strict`, refuses a deposit
/// below `resource_value` (DepositTooSmall). Throws InsufficientBalance if
/// the platform cannot fund deposit + collateral. Returns the cptxHash.
Digest32 platform_create_pool(Ledger& ledger, const KeyPair& platform, const CreatePool& params,
                              Amount resource_value, bool strict = true);

class PaymentService {
public:
    PaymentService(KeyPair platform, PublicKey tracker_key, Digest32 resource_id);

    void attach_pool(const Digest32& cptx_hash) { cptx_hash_ = cptx_hash; }
    const std::optional<Digest32>& pool() const noexcept { return cptx_hash_; }
    const PublicKey& platform_key() const noexcept { return platform_.public_key; }

    /// Verifies the receipt and the pair's certificate, credits the increment
    /// to the beneficiary and returns its updated AccumulatedPayment. Throws
    /// BadReceiptSignature, UnauthorizedPair, CertExpired or StaleReceipt.
    AccumulatedPayment submit_receipt(const ServiceReceipt& receipt,
                                      const std::optional<AuthCertificate>& cert,
                                      const Ledger& ledger);

    Amount transfer_amount(const Address& beneficiary) const;
    /// Re-issues the beneficiary's AccumulatedPayment against the pool's
    /// current settlement sequence, e.g. after an earlier settlement landed.
    AccumulatedPayment statement(const Address& beneficiary, const Ledger& ledger) const;

    /// Live-stream mode: restore the pool's remaining deposit to `target`
    /// when settlements have drawn it down. Returns the TopUpPool tx hash.
    std::optional<Digest32> top_up_if_needed(Ledger& ledger, Amount target);

private:
    KeyPair platform_;
    PublicKey tracker_key_;
    Digest32 resource_id_;
    std::optional<Digest32> cptx_hash_;

    struct PairState {
        Amount amount = 0;
        std::uint64_t next_seq = 0;
    };
    std::map<std::pair<Address, Address>, PairState> pairs_; // (signer, beneficiary)
    std::map<Address, Amount> totals_;
};

/// Settles an AccumulatedPayment as `submitter`. Throws InvalidSignature if
/// the platform signature is bad and WrongSubmitter unless the submitter is
/// the target. Returns the queued tx hash.
Digest32 settle_accumulated(Ledger& ledger, const AccumulatedPayment& ap,
                            const PublicKey& platform_key, const KeyPair& submitter);

Bytes encode(const ServiceReceipt& r);
Bytes encode(const AuthCertificate& c);
Bytes encode(const AccumulatedPayment& ap);
ServiceReceipt decode_service_receipt(ByteView wire);
AuthCertificate decode_auth_certificate(ByteView wire);
AccumulatedPayment decode_accumulated_payment(ByteView wire);

} // namespace mpool
