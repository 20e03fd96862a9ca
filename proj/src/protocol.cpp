#include "mpool/protocol.hpp"

namespace mpool {

const TargetAccount& PayerLedgerView::target(const Address& a) const
{
    static const TargetAccount fresh{};
    auto it = per_target_.find(a);
    return it == per_target_.end() ? fresh : it->second;
}

void PayerLedgerView::record_payment(const Address& target, Amount increment)
{
    per_target_[target].cumulative_amount += increment;
    total_promised_ += increment;
}

void PayerLedgerView::note_settlement(const Address& target)
{
    per_target_[target].next_tgt_seq += 1;
}

ServicePayment next_service_payment(PayerLedgerView& view, const KeyPair& creator,
                                    const Address& target, const Digest32& cptx_hash,
                                    Amount chunk_value, PayerMode mode)
{
    if (chunk_value == 0)
        throw Error(ErrorCode::NonPositiveIncrement, "chunk value must be positive");
    if (mode == PayerMode::Honest && view.total_promised() + chunk_value > view.deposit())
        throw Error(ErrorCode::DepositExhausted);

    const auto& acct = view.target(target);
    auto sp = sign_service_payment(creator.secret_key, target, acct.cumulative_amount + chunk_value,
                                   cptx_hash, acct.next_tgt_seq);
    view.record_payment(target, chunk_value);
    return sp;
}

std::string_view to_string(PaymentReject r) noexcept
{
    switch (r) {
    case PaymentReject::BadSignature: return "BadSignature";
    case PaymentReject::WrongPool: return "WrongPool";
    case PaymentReject::WrongSequence: return "WrongSequence";
    case PaymentReject::WrongAmount: return "WrongAmount";
    }
    return "Unknown";
}

std::optional<PaymentReject> verify_service_payment(const ServicePayment& sp,
                                                    const PublicKey& creator_key,
                                                    const PayeeExpectation& expect)
{
    if (!signature_valid(sp, creator_key))
        return PaymentReject::BadSignature;
    if (sp.cptx_hash != expect.expected_cptx_hash)
        return PaymentReject::WrongPool;
    if (sp.tgt_seq != expect.expected_tgt_seq)
        return PaymentReject::WrongSequence;
    if (sp.amount != expect.last_amount + expect.chunk_value)
        return PaymentReject::WrongAmount;
    return std::nullopt;
}

std::string_view to_string(HandshakeReject r) noexcept
{
    switch (r) {
    case HandshakeReject::BadProof: return "BadProof";
    case HandshakeReject::ResourceMismatch: return "ResourceMismatch";
    case HandshakeReject::DepositTooSmall: return "DepositTooSmall";
    case HandshakeReject::CollateralTooSmall: return "CollateralTooSmall";
    case HandshakeReject::Expired: return "Expired";
    }
    return "Unknown";
}

HandshakePacket build_handshake(const Ledger& ledger, const Digest32& cptx_hash)
{
    auto inc = ledger.inclusion(cptx_hash);
    const auto* pool = ledger.pool(cptx_hash);
    if (pool == nullptr)
        throw Error(ErrorCode::PoolNotFound, "committed tx did not create a pool");
    const auto& tx = ledger.block(inc.header.height).txs.at(inc.proof.leaf_index);

    HandshakePacket p;
    p.cptx_hash = cptx_hash;
    p.header = inc.header;
    p.inclusion_proof = std::move(inc.proof);
    p.terms = PoolTerms{pool->resource_id, std::get<CreatePool>(tx.payload).deposit,
                        pool->collateral, pool->duration, pool->create_height};
    p.creator_key = tx.submitter_key;
    p.creator_nonce = tx.nonce;
    return p;
}

std::optional<HandshakeReject> verify_handshake(const HandshakePacket& packet,
                                                const HandshakeExpectation& expect,
                                                std::span<const BlockHeader> trusted_headers)
{
    const auto& t = packet.terms;
    if (packet.header.height >= trusted_headers.size() ||
        trusted_headers[packet.header.height] != packet.header ||
        t.create_height != packet.header.height)
        return HandshakeReject::BadProof;

    CreatePool payload{t.resource_id, t.deposit, t.collateral, t.duration};
    auto leaf = hash(create_pool_signing_bytes(packet.creator_key, packet.creator_nonce, payload));
    if (leaf != packet.cptx_hash ||
        !merkle_verify(packet.header.tx_root, leaf, packet.inclusion_proof))
        return HandshakeReject::BadProof;

    if (t.resource_id != expect.resource_id)
        return HandshakeReject::ResourceMismatch;
    if (t.deposit < expect.min_deposit)
        return HandshakeReject::DepositTooSmall;
    if (t.collateral < expect.min_collateral || t.collateral <= t.deposit)
        return HandshakeReject::CollateralTooSmall;
    if (expect.current_height >= t.create_height + t.duration)
        return HandshakeReject::Expired;
    return std::nullopt;
}

// ---- codecs ---------------------------------------------------------------

void write_header(ByteWriter& w, const BlockHeader& h)
{
    w.u64(h.height).raw(h.parent_hash.bytes).raw(h.tx_root.bytes);
}

BlockHeader read_header(ByteReader& r)
{
    BlockHeader h;
    h.height = r.u64();
    h.parent_hash.bytes = r.fixed<32>();
    h.tx_root.bytes = r.fixed<32>();
    return h;
}

void write_proof(ByteWriter& w, const MerkleProof& p)
{
    w.u64(p.leaf_index).u64(p.leaf_count).u32(static_cast<std::uint32_t>(p.siblings.size()));
    for (const auto& s : p.siblings)
        w.raw(s.bytes);
}

MerkleProof read_proof(ByteReader& r)
{
    MerkleProof p;
    p.leaf_index = r.u64();
    p.leaf_count = r.u64();
    auto n = r.u32();
    if (n > 64)
        throw Error(ErrorCode::DecodeError, "merkle proof too deep");
    p.siblings.resize(n);
    for (auto& s : p.siblings)
        s.bytes = r.fixed<32>();
    return p;
}

namespace {

void expect_tag(ByteReader& r, MessageTag tag)
{
    if (r.u8() != static_cast<std::uint8_t>(tag))
        throw Error(ErrorCode::DecodeError, "unexpected message tag");
}

} // namespace

Bytes encode(const ServicePayment& sp)
{
    return ByteWriter()
        .u8(static_cast<std::uint8_t>(MessageTag::ServicePayment))
        .raw(serialize_for_signing(sp))
        .raw(sp.sigma.bytes)
        .bytes();
}

ServicePayment decode_service_payment(ByteView wire)
{
    ByteReader r(wire);
    expect_tag(r, MessageTag::ServicePayment);
    ServicePayment sp;
    sp.target.bytes = r.fixed<20>();
    sp.amount = r.u64();
    sp.cptx_hash.bytes = r.fixed<32>();
    sp.tgt_seq = r.u64();
    sp.sigma.bytes = r.fixed<64>();
    r.expect_end();
    return sp;
}

Bytes encode(const HandshakePacket& p)
{
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(MessageTag::HandshakePacket)).raw(p.cptx_hash.bytes);
    write_header(w, p.header);
    write_proof(w, p.inclusion_proof);
    w.raw(p.terms.resource_id.bytes)
        .u64(p.terms.deposit)
        .u64(p.terms.collateral)
        .u64(p.terms.duration)
        .u64(p.terms.create_height)
        .raw(p.creator_key.bytes)
        .u64(p.creator_nonce);
    return std::move(w).bytes();
}

HandshakePacket decode_handshake(ByteView wire)
{
    ByteReader r(wire);
    expect_tag(r, MessageTag::HandshakePacket);
    HandshakePacket p;
    p.cptx_hash.bytes = r.fixed<32>();
    p.header = read_header(r);
    p.inclusion_proof = read_proof(r);
    p.terms.resource_id.bytes = r.fixed<32>();
    p.terms.deposit = r.u64();
    p.terms.collateral = r.u64();
    p.terms.duration = r.u64();
    p.terms.create_height = r.u64();
    p.creator_key.bytes = r.fixed<32>();
    p.creator_nonce = r.u64();
    r.expect_end();
    return p;
}

} // namespace mpool
