#include "mpool/peer.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace mpool {

Digest32 compute_resource_id(std::span<const Digest32> chunk_hashes, Amount chunk_value)
{
    ByteWriter w;
    for (const auto& h : chunk_hashes)
        w.raw(h.bytes);
    w.u64(chunk_value);
    return hash(w.bytes());
}

bool ChunkManifest::self_consistent() const
{
    return resource_id == compute_resource_id(chunk_hashes, chunk_value);
}

ChunkManifest ChunkManifest::from_chunks(const std::vector<Bytes>& chunks, Amount chunk_value)
{
    ChunkManifest m;
    m.chunk_value = chunk_value;
    m.chunk_hashes.reserve(chunks.size());
    for (const auto& c : chunks)
        m.chunk_hashes.push_back(hash(c));
    m.resource_id = compute_resource_id(m.chunk_hashes, chunk_value);
    return m;
}

Bytes ChunkSource::chunk(std::size_t index) const
{
    Bytes out;
    out.reserve(chunk_size_ + 32);
    for (std::uint64_t block = 0; out.size() < chunk_size_; ++block) {
        auto d = hash(ByteWriter().u64(seed_).u64(index).u64(block).bytes());
        out.insert(out.end(), d.bytes.begin(), d.bytes.end());
    }
    out.resize(chunk_size_);
    return out;
}

ChunkManifest ChunkSource::manifest(Amount chunk_value) const
{
    std::vector<Bytes> chunks;
    chunks.reserve(chunk_count_);
    for (std::size_t i = 0; i < chunk_count_; ++i)
        chunks.push_back(chunk(i));
    return ChunkManifest::from_chunks(chunks, chunk_value);
}

void write_manifest(std::ostream& out, const ChunkManifest& m)
{
    out << m.resource_id.hex() << ' ' << m.chunk_value << ' ' << m.chunk_count() << '\n';
    for (const auto& h : m.chunk_hashes)
        out << h.hex() << '\n';
}

ChunkManifest read_manifest(std::istream& in)
{
    auto fail = [](std::size_t line, const std::string& why) {
        return Error(ErrorCode::ParseError, "manifest line " + std::to_string(line) + ": " + why);
    };

    std::string line;
    if (!std::getline(in, line))
        throw fail(1, "missing header");
    std::istringstream header(line);
    std::string rid;
    Amount value = 0;
    std::size_t count = 0;
    if (!(header >> rid >> value >> count))
        throw fail(1, "expected '<resourceId> <chunkValue> <chunkCount>'");

    ChunkManifest m;
    m.chunk_value = value;
    try {
        m.resource_id = Digest32::from_hex(rid);
        for (std::size_t i = 0; i < count; ++i) {
            if (!std::getline(in, line))
                throw fail(i + 2, "missing chunk hash");
            m.chunk_hashes.push_back(Digest32::from_hex(line));
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ParseError)
            throw;
        throw fail(m.chunk_hashes.size() + 2, e.what());
    }
    if (!m.self_consistent())
        throw fail(1, "resource id does not match chunk hashes");
    return m;
}

bool verify_chunk(const ChunkManifest& manifest, std::size_t index, ByteView chunk)
{
    if (index >= manifest.chunk_count())
        throw Error(ErrorCode::IndexOutOfRange, "chunk index out of range");
    return hash(chunk) == manifest.chunk_hashes[index];
}

// ---------------------------------------------------------------------------

std::string SettlementPolicy::to_string() const
{
    switch (kind) {
    case Kind::EveryChunk: return "every_chunk";
    case Kind::AtExpiryOnly: return "at_expiry_only";
    case Kind::Lazy: return "lazy:" + std::to_string(threshold);
    }
    return "unknown";
}

SettlementPolicy SettlementPolicy::parse(std::string_view text)
{
    if (text == "every_chunk")
        return {Kind::EveryChunk, 0};
    if (text == "at_expiry_only")
        return {Kind::AtExpiryOnly, 0};
    if (text.starts_with("lazy:")) {
        auto digits = text.substr(5);
        Amount threshold = 0;
        if (digits.empty())
            throw Error(ErrorCode::ParseError, "lazy policy needs a threshold");
        for (char c : digits) {
            if (c < '0' || c > '9')
                throw Error(ErrorCode::ParseError, "lazy threshold must be a non-negative integer");
            threshold = threshold * 10 + static_cast<Amount>(c - '0');
        }
        return {Kind::Lazy, threshold};
    }
    throw Error(ErrorCode::ParseError, "unknown settlement policy '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------

ViewerNode::ViewerNode(KeyPair keys, ChunkManifest manifest, Amount deposit, PayerMode mode)
    : keys_(std::move(keys)), manifest_(std::move(manifest)), view_(deposit), mode_(mode)
{
}

void ViewerNode::add_peer(const PeerId& peer)
{
    if (std::find(peers_.begin(), peers_.end(), peer) == peers_.end())
        peers_.push_back(peer);
}

std::vector<PeerId> ViewerNode::active_peers() const
{
    std::vector<PeerId> out;
    for (const auto& p : peers_)
        if (!blacklist_.contains(p))
            out.push_back(p);
    return out;
}

void ViewerNode::mark_received(std::size_t index)
{
    received_.insert(index);
    while (cursor_ < manifest_.chunk_count() && received_.contains(cursor_))
        ++cursor_;
}

void ViewerNode::record_loss(const PeerId& peer, Amount amount)
{
    undelivered_loss_ += amount;
    loss_per_peer_[peer] += amount;
}

std::string_view to_string(CacherBehavior b) noexcept
{
    switch (b) {
    case CacherBehavior::Honest: return "honest";
    case CacherBehavior::Withholding: return "withholding";
    case CacherBehavior::ColludingEdward: return "colluding";
    }
    return "unknown";
}

CacherNode::CacherNode(KeyPair keys, const ChunkSource* source, ChunkManifest manifest,
                       std::set<std::size_t> inventory, CacherBehavior behavior)
    : keys_(std::move(keys)), source_(source), manifest_(std::move(manifest)),
      inventory_(std::move(inventory)), behavior_(behavior)
{
}

std::optional<HandshakeReject> CacherNode::accept_handshake(const HandshakePacket& packet,
                                                            std::span<const BlockHeader> headers,
                                                            Height current_height)
{
    HandshakeExpectation expect{manifest_.resource_id, manifest_.total_value(), 0, current_height};
    if (auto reject = verify_handshake(packet, expect, headers))
        return reject;
    auto payer = address_of(packet.creator_key);
    if (!sessions_.contains(payer)) {
        PayeeSession s;
        s.creator_key = packet.creator_key;
        s.expect = PayeeExpectation{packet.cptx_hash, 0, 0, manifest_.chunk_value};
        sessions_.emplace(payer, std::move(s));
    }
    return std::nullopt;
}

const PayeeSession* CacherNode::session(const Address& payer) const
{
    auto it = sessions_.find(payer);
    return it == sessions_.end() ? nullptr : &it->second;
}

std::optional<PaymentReject> CacherNode::receive_payment(const Address& payer,
                                                         const ServicePayment& sp)
{
    auto it = sessions_.find(payer);
    if (it == sessions_.end())
        return PaymentReject::WrongPool;
    auto& s = it->second;
    if (sp.target != id())
        return PaymentReject::WrongPool;
    if (auto reject = verify_service_payment(sp, s.creator_key, s.expect))
        return reject;
    s.expect.last_amount = sp.amount;
    s.latest = sp;
    received_.push_back(sp);
    return std::nullopt;
}

std::optional<Bytes> CacherNode::serve(std::size_t index) const
{
    if (!inventory_.contains(index) || source_ == nullptr)
        return std::nullopt;
    if (behavior_ == CacherBehavior::Withholding) {
        auto garbage = source_->chunk(index);
        garbage.front() ^= 0xff;
        return garbage;
    }
    return source_->chunk(index);
}

Amount CacherNode::unsettled(const Address& payer) const
{
    const auto* s = session(payer);
    if (s == nullptr)
        return 0;
    return s->expect.last_amount - s->submitted_amount;
}

bool CacherNode::has_claim(const Address& payer, Amount fee) const
{
    return unsettled(payer) > fee;
}

bool CacherNode::wants_to_settle(const Address& payer, const SettlementPolicy& policy,
                                 Amount fee) const
{
    auto owed = unsettled(payer);
    if (owed <= fee)
        return false;
    switch (policy.kind) {
    case SettlementPolicy::Kind::EveryChunk: return true;
    case SettlementPolicy::Kind::Lazy: return owed >= policy.threshold;
    case SettlementPolicy::Kind::AtExpiryOnly: return false;
    }
    return false;
}

Digest32 CacherNode::settle(Ledger& ledger, const Address& payer)
{
    auto it = sessions_.find(payer);
    if (it == sessions_.end() || !it->second.latest)
        throw Error(ErrorCode::NonPositiveIncrement, "nothing to settle");
    auto& s = it->second;
    auto tx = make_tx(keys_, Settlement{*s.latest}, ledger.next_nonce(id()));
    auto h = ledger.submit(std::move(tx));
    s.submitted_amount = s.latest->amount;
    s.expect.expected_tgt_seq += 1;
    ++settlements_sent_;
    return h;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ChunkExchangeOutcome o) noexcept
{
    switch (o) {
    case ChunkExchangeOutcome::Delivered: return "Delivered";
    case ChunkExchangeOutcome::PaidButUndelivered: return "PaidButUndelivered";
    case ChunkExchangeOutcome::PaymentRejected: return "PaymentRejected";
    }
    return "Unknown";
}

ChunkExchangeOutcome request_chunk(ViewerNode& viewer, CacherNode& cacher, std::size_t index,
                                   const std::function<void(ServicePayment&)>& tamper)
{
    if (viewer.is_blacklisted(cacher.id()))
        throw Error(ErrorCode::Blacklisted);
    if (!viewer.pool() || !cacher.handshaked_with(viewer.keys().address))
        throw Error(ErrorCode::NotHandshaked);
    if (viewer.received().contains(index))
        throw Error(ErrorCode::AlreadyReceived, "chunk already bought");
    if (index >= viewer.manifest().chunk_count())
        throw Error(ErrorCode::IndexOutOfRange, "chunk index out of range");

    auto value = viewer.manifest().chunk_value;
    auto draft = viewer.view();
    auto sp = next_service_payment(draft, viewer.keys(), cacher.id(), *viewer.pool(), value,
                                   viewer.mode());
    if (tamper)
        tamper(sp);
    if (cacher.receive_payment(viewer.keys().address, sp))
        return ChunkExchangeOutcome::PaymentRejected;

    viewer.view() = std::move(draft);
    viewer.count_payment();
    auto chunk = cacher.serve(index);
    if (chunk && verify_chunk(viewer.manifest(), index, *chunk)) {
        viewer.mark_received(index);
        return ChunkExchangeOutcome::Delivered;
    }
    viewer.record_loss(cacher.id(), value);
    return ChunkExchangeOutcome::PaidButUndelivered;
}

void switch_peer(ViewerNode& viewer, CacherNode& to, const Ledger& ledger)
{
    if (viewer.is_blacklisted(to.id()))
        throw Error(ErrorCode::Blacklisted);
    if (!viewer.pool())
        throw Error(ErrorCode::NotHandshaked, "viewer has no pool");
    auto packet = build_handshake(ledger, *viewer.pool());
    auto headers = ledger.headers();
    if (auto reject = to.accept_handshake(packet, headers, ledger.height()))
        throw Error(ErrorCode::NotHandshaked,
                    "handshake rejected: " + std::string(to_string(*reject)));
    viewer.add_peer(to.id());
}

CollusionTxs collude_full_drain(Ledger& ledger, ViewerNode& creator, CacherNode& edward,
                                Amount kickback)
{
    if (!creator.pool())
        throw Error(ErrorCode::NotHandshaked, "creator has no pool");
    auto sp = next_service_payment(creator.view(), creator.keys(), edward.id(), *creator.pool(),
                                   creator.view().deposit(), PayerMode::Adversarial);
    CollusionTxs out;
    out.settlement =
        ledger.submit(make_tx(edward.keys(), Settlement{sp}, ledger.next_nonce(edward.id())));
    out.kickback = ledger.submit(make_tx(edward.keys(), Transfer{creator.keys().address, kickback},
                                         ledger.next_nonce(edward.id())));
    return out;
}

} // namespace mpool
