#pragma once

// Viewer (payer) and cacher (payee) agents. Exchanges are payment-first:
// the viewer sends a ServicePayment, the cacher verifies it and returns the
// chunk, and the viewer checks the chunk against the manifest.

#include "mpool/protocol.hpp"

#include <functional>
#include <iosfwd>
#include <set>

namespace mpool {

using PeerId = Address;

// ---- resource description -------------------------------------------------

struct ChunkManifest {
    Digest32 resource_id;
    std::vector<Digest32> chunk_hashes;
    Amount chunk_value = 0;

    std::size_t chunk_count() const noexcept { return chunk_hashes.size(); }
    Amount total_value() const noexcept { return chunk_value * chunk_hashes.size(); }
    /// resource_id == hash(chunk hashes || u64 chunk_value)
    bool self_consistent() const;

    static ChunkManifest from_chunks(const std::vector<Bytes>& chunks, Amount chunk_value);
};

Digest32 compute_resource_id(std::span<const Digest32> chunk_hashes, Amount chunk_value);

/// Deterministic pseudo-random chunk content.
class ChunkSource {
public:
    ChunkSource(std::uint64_t seed, std::size_t chunk_size, std::size_t chunk_count)
        : seed_(seed), chunk_size_(chunk_size), chunk_count_(chunk_count)
    {
    }

    Bytes chunk(std::size_t index) const;
    std::size_t chunk_count() const noexcept { return chunk_count_; }
    ChunkManifest manifest(Amount chunk_value) const;

private:
    std::uint64_t seed_;
    std::size_t chunk_size_;
    std::size_t chunk_count_;
};

/// Header line "<resourceId hex> <chunk value> <chunk count>", then one
/// chunk-hash hex per line.
void write_manifest(std::ostream& out, const ChunkManifest& m);
/// Throws Error(ParseError) on malformed input or a resource id that does
/// not match the listed chunks.
ChunkManifest read_manifest(std::istream& in);

/// Throws Error(IndexOutOfRange).
bool verify_chunk(const ChunkManifest& manifest, std::size_t index, ByteView chunk);

// ---- settlement policy ----------------------------------------------------

struct SettlementPolicy {
    enum class Kind { EveryChunk, Lazy, AtExpiryOnly };
    Kind kind = Kind::AtExpiryOnly;
    Amount threshold = 0; // Lazy only

    bool operator==(const SettlementPolicy&) const = default;
    std::string to_string() const;
    /// "every_chunk", "at_expiry_only" or "lazy:<threshold>".
    static SettlementPolicy parse(std::string_view text);
};

// ---- agents ---------------------------------------------------------------

class ViewerNode {
public:
    ViewerNode(KeyPair keys, ChunkManifest manifest, Amount deposit,
               PayerMode mode = PayerMode::Honest);

    const KeyPair& keys() const noexcept { return keys_; }
    const ChunkManifest& manifest() const noexcept { return manifest_; }
    PayerLedgerView& view() noexcept { return view_; }
    const PayerLedgerView& view() const noexcept { return view_; }
    PayerMode mode() const noexcept { return mode_; }

    void attach_pool(const Digest32& cptx_hash) { cptx_hash_ = cptx_hash; }
    const std::optional<Digest32>& pool() const noexcept { return cptx_hash_; }

    void add_peer(const PeerId& peer);
    const std::vector<PeerId>& peers() const noexcept { return peers_; }
    /// Peers not blacklisted, in connection order.
    std::vector<PeerId> active_peers() const;

    bool is_blacklisted(const PeerId& peer) const { return blacklist_.contains(peer); }
    const std::set<PeerId>& blacklist() const noexcept { return blacklist_; }
    /// One strike: the peer is dropped for the rest of the session.
    void on_undelivered(const PeerId& peer) { blacklist_.insert(peer); }

    /// Next chunk index not yet received, or chunk_count() when done.
    std::size_t cursor() const noexcept { return cursor_; }
    bool complete() const noexcept { return cursor_ >= manifest_.chunk_count(); }
    const std::set<std::size_t>& received() const noexcept { return received_; }
    void mark_received(std::size_t index);

    Amount undelivered_loss() const noexcept { return undelivered_loss_; }
    const std::map<PeerId, Amount>& loss_per_peer() const noexcept { return loss_per_peer_; }
    void record_loss(const PeerId& peer, Amount amount);

    std::uint64_t payments_issued() const noexcept { return payments_issued_; }
    void count_payment() { ++payments_issued_; }

private:
    KeyPair keys_;
    ChunkManifest manifest_;
    PayerLedgerView view_;
    PayerMode mode_;
    std::optional<Digest32> cptx_hash_;
    std::vector<PeerId> peers_;
    std::set<PeerId> blacklist_;
    std::set<std::size_t> received_;
    std::size_t cursor_ = 0;
    Amount undelivered_loss_ = 0;
    std::map<PeerId, Amount> loss_per_peer_;
    std::uint64_t payments_issued_ = 0;
};

enum class CacherBehavior { Honest, Withholding, ColludingEdward };
std::string_view to_string(CacherBehavior b) noexcept;

/// Per-payer state kept by a cacher after a successful handshake.
struct PayeeSession {
    PublicKey creator_key;
    PayeeExpectation expect;
    Amount submitted_amount = 0; // cumulative amount in the last settlement sent
    std::optional<ServicePayment> latest;
};

class CacherNode {
public:
    /// `source` must outlive the node.
    CacherNode(KeyPair keys, const ChunkSource* source, ChunkManifest manifest,
               std::set<std::size_t> inventory, CacherBehavior behavior = CacherBehavior::Honest);

    const KeyPair& keys() const noexcept { return keys_; }
    const PeerId& id() const noexcept { return keys_.address; }
    CacherBehavior behavior() const noexcept { return behavior_; }
    bool holds(std::size_t index) const { return inventory_.contains(index); }

    /// Checks the pool against this cacher's manifest (resource id, deposit
    /// covering the whole resource); on accept opens a session for the
    /// packet's creator. Re-handshaking keeps an existing session.
    std::optional<HandshakeReject> accept_handshake(const HandshakePacket& packet,
                                                    std::span<const BlockHeader> headers,
                                                    Height current_height);
    bool handshaked_with(const Address& payer) const { return sessions_.contains(payer); }
    const PayeeSession* session(const Address& payer) const;

    std::optional<PaymentReject> receive_payment(const Address& payer, const ServicePayment& sp);
    /// Honest cachers return the chunk; withholding ones return garbage.
    std::optional<Bytes> serve(std::size_t index) const;
    const std::vector<ServicePayment>& received_payments() const noexcept { return received_; }

    /// Unsettled cumulative increment owed by `payer`.
    Amount unsettled(const Address& payer) const;
    bool wants_to_settle(const Address& payer, const SettlementPolicy& policy, Amount fee) const;
    /// True if anything above `fee` is left to claim.
    bool has_claim(const Address& payer, Amount fee) const;
    /// Submits the latest payment from `payer` to the ledger and advances
    /// the expected sequence number. Returns the settlement tx hash.
    Digest32 settle(Ledger& ledger, const Address& payer);
    std::uint64_t settlements_sent() const noexcept { return settlements_sent_; }

private:
    KeyPair keys_;
    const ChunkSource* source_;
    ChunkManifest manifest_;
    std::set<std::size_t> inventory_;
    CacherBehavior behavior_;
    std::map<Address, PayeeSession> sessions_;
    std::vector<ServicePayment> received_;
    std::uint64_t settlements_sent_ = 0;
};

// ---- exchanges --------------------------------------------------------------

enum class ChunkExchangeOutcome { Delivered, PaidButUndelivered, PaymentRejected };
std::string_view to_string(ChunkExchangeOutcome o) noexcept;

/// One payment-first chunk exchange. `tamper`, if set, alters the payment in
/// flight. A rejected payment leaves the viewer's bookkeeping untouched.
/// Throws Error(Blacklisted), Error(NotHandshaked), Error(AlreadyReceived) or
/// Error(DepositExhausted).
ChunkExchangeOutcome request_chunk(ViewerNode& viewer, CacherNode& cacher, std::size_t index,
                                   const std::function<void(ServicePayment&)>& tamper = {});

/// Hands the pool's handshake packet to `to`; never touches the chain.
/// Throws Error(Blacklisted) or Error(NotHandshaked) if `to` rejects the packet.
void switch_peer(ViewerNode& viewer, CacherNode& to, const Ledger& ledger);

struct CollusionTxs {
    Digest32 settlement;
    Digest32 kickback;
};

/// The creator pays the colluding peer the whole deposit off-chain, the
/// colluder settles it first and transfers `kickback` back to the creator.
/// Both txs are queued; the caller commits.
CollusionTxs collude_full_drain(Ledger& ledger, ViewerNode& creator, CacherNode& edward,
                                Amount kickback);

} // namespace mpool
