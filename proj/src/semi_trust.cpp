#include "mpool/semi_trust.hpp"

#include <algorithm>

namespace mpool {

Bytes cert_signing_bytes(const AuthCertificate& c)
{
    return ByteWriter()
        .u8(static_cast<std::uint8_t>(MessageTag::AuthCertificate))
        .raw(c.sharer.bytes)
        .raw(c.receiver.bytes)
        .u64(c.valid_from)
        .u64(c.valid_until)
        .bytes();
}

std::vector<AuthCertificate> tracker_group_peers(const KeyPair& tracker,
                                                 std::span<const Address> peers,
                                                 std::span<const Address> sharers,
                                                 Height valid_from, Height valid_until)
{
    if (peers.size() < 2)
        throw Error(ErrorCode::TooFewPeers, "a group needs at least two peers");

    std::vector<AuthCertificate> certs;
    for (const auto& sharer : peers) {
        if (!sharers.empty() && std::find(sharers.begin(), sharers.end(), sharer) == sharers.end())
            continue;
        for (const auto& receiver : peers) {
            if (receiver == sharer)
                continue;
            AuthCertificate c{sharer, receiver, valid_from, valid_until, {}};
            c.tracker_signature = sign(tracker.secret_key, cert_signing_bytes(c));
            certs.push_back(c);
        }
    }
    return certs;
}

Bytes receipt_signing_bytes(const ServiceReceipt& r)
{
    return ByteWriter()
        .u8(static_cast<std::uint8_t>(MessageTag::ServiceReceipt))
        .raw(r.signer_key.bytes)
        .raw(r.beneficiary.bytes)
        .raw(r.resource_id.bytes)
        .u64(r.cumulative_amount)
        .u64(r.receipt_seq)
        .bytes();
}

ServiceReceipt ReceiptBook::sign(const KeyPair& viewer, const Address& beneficiary,
                                 const Digest32& resource_id, Amount new_cumulative)
{
    auto& c = counters_[beneficiary];
    if (new_cumulative <= c.amount)
        throw Error(ErrorCode::NonMonotoneAmount, "receipt amount must increase");
    ServiceReceipt r{viewer.public_key, beneficiary, resource_id, new_cumulative, c.next_seq, {}};
    r.signature = mpool::sign(viewer.secret_key, receipt_signing_bytes(r));
    c.amount = new_cumulative;
    ++c.next_seq;
    return r;
}

Amount ReceiptBook::last_amount(const Address& beneficiary) const
{
    auto it = counters_.find(beneficiary);
    return it == counters_.end() ? 0 : it->second.amount;
}

Digest32 platform_create_pool(Ledger& ledger, const KeyPair& platform, const CreatePool& params,
                              Amount resource_value, bool strict)
{
    if (strict && params.deposit < resource_value)
        throw Error(ErrorCode::DepositTooSmall, "deposit must cover the resource value");
    if (ledger.balance(platform.address) < params.deposit + params.collateral)
        throw Error(ErrorCode::InsufficientBalance);
    return ledger.submit(make_tx(platform, params, ledger.next_nonce(platform.address)));
}

PaymentService::PaymentService(KeyPair platform, PublicKey tracker_key, Digest32 resource_id)
    : platform_(std::move(platform)), tracker_key_(tracker_key), resource_id_(resource_id)
{
}

AccumulatedPayment PaymentService::submit_receipt(const ServiceReceipt& receipt,
                                                  const std::optional<AuthCertificate>& cert,
                                                  const Ledger& ledger)
{
    if (!verify(receipt.signer_key, receipt_signing_bytes(receipt), receipt.signature))
        throw Error(ErrorCode::BadReceiptSignature);
    auto signer = receipt.signer();
    if (!cert || cert->sharer != receipt.beneficiary || cert->receiver != signer ||
        !verify(tracker_key_, cert_signing_bytes(*cert), cert->tracker_signature))
        throw Error(ErrorCode::UnauthorizedPair, "no tracker certificate for this pair");
    auto now = ledger.height();
    if (now < cert->valid_from || now > cert->valid_until)
        throw Error(ErrorCode::CertExpired);
    if (receipt.resource_id != resource_id_)
        throw Error(ErrorCode::UnauthorizedPair, "receipt is for another resource");
    if (!cptx_hash_)
        throw Error(ErrorCode::PoolNotFound, "payment service has no pool");
    const auto* pool = ledger.pool(*cptx_hash_);
    if (pool == nullptr)
        throw Error(ErrorCode::PoolNotFound);

    auto& pair = pairs_[{signer, receipt.beneficiary}];
    if (receipt.receipt_seq != pair.next_seq || receipt.cumulative_amount <= pair.amount)
        throw Error(ErrorCode::StaleReceipt);

    auto increment = receipt.cumulative_amount - pair.amount;
    pair.amount = receipt.cumulative_amount;
    ++pair.next_seq;
    totals_[receipt.beneficiary] += increment;
    return statement(receipt.beneficiary, ledger);
}

AccumulatedPayment PaymentService::statement(const Address& beneficiary, const Ledger& ledger) const
{
    if (!cptx_hash_)
        throw Error(ErrorCode::PoolNotFound, "payment service has no pool");
    const auto* pool = ledger.pool(*cptx_hash_);
    if (pool == nullptr)
        throw Error(ErrorCode::PoolNotFound);
    AccumulatedPayment ap{beneficiary, transfer_amount(beneficiary), *cptx_hash_,
                          pool->next_seq(beneficiary), {}};
    ap.platform_signature = sign(platform_.secret_key, serialize_for_signing(ap.as_service_payment()));
    return ap;
}

Amount PaymentService::transfer_amount(const Address& beneficiary) const
{
    auto it = totals_.find(beneficiary);
    return it == totals_.end() ? 0 : it->second;
}

std::optional<Digest32> PaymentService::top_up_if_needed(Ledger& ledger, Amount target)
{
    if (!cptx_hash_)
        return std::nullopt;
    const auto* pool = ledger.pool(*cptx_hash_);
    if (pool == nullptr || pool->status != PoolStatus::Active || pool->remaining_deposit >= target)
        return std::nullopt;
    auto tx = make_tx(platform_, TopUpPool{*cptx_hash_, target - pool->remaining_deposit},
                      ledger.next_nonce(platform_.address));
    return ledger.submit(std::move(tx));
}

Digest32 settle_accumulated(Ledger& ledger, const AccumulatedPayment& ap,
                            const PublicKey& platform_key, const KeyPair& submitter)
{
    auto sp = ap.as_service_payment();
    if (!signature_valid(sp, platform_key))
        throw Error(ErrorCode::InvalidSignature, "accumulated payment not signed by the platform");
    if (submitter.address != ap.target_address)
        throw Error(ErrorCode::WrongSubmitter);
    return ledger.submit(make_tx(submitter, Settlement{sp}, ledger.next_nonce(submitter.address)));
}

// ---- codecs ---------------------------------------------------------------

namespace {

void expect_tag(ByteReader& r, MessageTag tag)
{
    if (r.u8() != static_cast<std::uint8_t>(tag))
        throw Error(ErrorCode::DecodeError, "unexpected message tag");
}

} // namespace

Bytes encode(const ServiceReceipt& r)
{
    auto out = receipt_signing_bytes(r);
    out.insert(out.end(), r.signature.bytes.begin(), r.signature.bytes.end());
    return out;
}

Bytes encode(const AuthCertificate& c)
{
    auto out = cert_signing_bytes(c);
    out.insert(out.end(), c.tracker_signature.bytes.begin(), c.tracker_signature.bytes.end());
    return out;
}

Bytes encode(const AccumulatedPayment& ap)
{
    return ByteWriter()
        .u8(static_cast<std::uint8_t>(MessageTag::AccumulatedPayment))
        .raw(serialize_for_signing(ap.as_service_payment()))
        .raw(ap.platform_signature.bytes)
        .bytes();
}

ServiceReceipt decode_service_receipt(ByteView wire)
{
    ByteReader r(wire);
    expect_tag(r, MessageTag::ServiceReceipt);
    ServiceReceipt out;
    out.signer_key.bytes = r.fixed<32>();
    out.beneficiary.bytes = r.fixed<20>();
    out.resource_id.bytes = r.fixed<32>();
    out.cumulative_amount = r.u64();
    out.receipt_seq = r.u64();
    out.signature.bytes = r.fixed<64>();
    r.expect_end();
    return out;
}

AuthCertificate decode_auth_certificate(ByteView wire)
{
    ByteReader r(wire);
    expect_tag(r, MessageTag::AuthCertificate);
    AuthCertificate c;
    c.sharer.bytes = r.fixed<20>();
    c.receiver.bytes = r.fixed<20>();
    c.valid_from = r.u64();
    c.valid_until = r.u64();
    c.tracker_signature.bytes = r.fixed<64>();
    r.expect_end();
    return c;
}

AccumulatedPayment decode_accumulated_payment(ByteView wire)
{
    ByteReader r(wire);
    expect_tag(r, MessageTag::AccumulatedPayment);
    AccumulatedPayment ap;
    ap.target_address.bytes = r.fixed<20>();
    ap.transfer_amount = r.u64();
    ap.create_pool_tx_hash.bytes = r.fixed<32>();
    ap.target_settlement_sequence = r.u64();
    ap.platform_signature.bytes = r.fixed<64>();
    r.expect_end();
    return ap;
}

} // namespace mpool
