#include "mpool/channel.hpp"

namespace mpool {

std::string_view to_string(ChannelPhase p) noexcept
{
    switch (p) {
    case ChannelPhase::PendingOpen: return "PendingOpen";
    case ChannelPhase::Open: return "Open";
    case ChannelPhase::Closed: return "Closed";
    }
    return "Unknown";
}

ChannelState open_channel(Ledger& ledger, const KeyPair& funder, const PublicKey& counterparty,
                          Amount capacity)
{
    if (ledger.balance(funder.address) < capacity)
        throw Error(ErrorCode::InsufficientBalance, "funder cannot lock channel capacity");
    auto tx = make_tx(funder, ChannelOpen{counterparty, capacity}, ledger.next_nonce(funder.address));
    ChannelState ch;
    ch.channel_id = ledger.submit(std::move(tx));
    ch.funder = funder.address;
    ch.counterparty = address_of(counterparty);
    ch.capacity = capacity;
    ch.funder_balance = capacity;
    return ch;
}

void refresh(ChannelState& channel, const Ledger& ledger)
{
    if (channel.phase != ChannelPhase::PendingOpen)
        return;
    if (!channel.open_height) {
        const auto* r = ledger.receipt(channel.channel_id);
        if (r == nullptr || !r->ok())
            return;
        channel.open_height = r->height;
    }
    if (ledger.height() >= *channel.usable_height(ledger.config().confirmation_depth))
        channel.phase = ChannelPhase::Open;
}

namespace {

ChannelCommitment sign_split(const ChannelState& channel, Amount funder_balance,
                             Amount counterparty_balance, std::uint64_t seq, const KeyPair& funder,
                             const KeyPair& counterparty)
{
    ChannelCommitment c{channel.channel_id, funder_balance, counterparty_balance, seq, {}, {}};
    auto bytes = commitment_signing_bytes(c);
    c.funder_sig = sign(funder.secret_key, bytes);
    c.counterparty_sig = sign(counterparty.secret_key, bytes);
    return c;
}

} // namespace

ChannelCommitment initial_commitment(const ChannelState& channel, const KeyPair& funder,
                                     const KeyPair& counterparty)
{
    return sign_split(channel, channel.capacity, 0, 0, funder, counterparty);
}

ChannelCommitment propose_payment(const ChannelState& channel, Amount amount,
                                  const KeyPair& funder, const KeyPair& counterparty)
{
    if (channel.phase != ChannelPhase::Open)
        throw Error(ErrorCode::ChannelNotOpen);
    if (amount == 0 || amount > channel.funder_balance)
        throw Error(ErrorCode::NonMonotonePayment, "payment must be positive and covered");
    return sign_split(channel, channel.funder_balance - amount,
                      channel.counterparty_balance + amount, channel.commitment_seq + 1, funder,
                      counterparty);
}

void update_commitment(ChannelState& channel, const ChannelCommitment& c,
                       const PublicKey& funder_key, const PublicKey& counterparty_key)
{
    if (channel.phase != ChannelPhase::Open)
        throw Error(ErrorCode::ChannelNotOpen);
    if (c.channel_id != channel.channel_id)
        throw Error(ErrorCode::ChannelNotFound, "commitment for another channel");
    if (c.funder_balance + c.counterparty_balance != channel.capacity)
        throw Error(ErrorCode::BalancesDontSum);
    if (c.seq != channel.commitment_seq + 1)
        throw Error(ErrorCode::StaleCommitment);
    if (c.funder_balance >= channel.funder_balance)
        throw Error(ErrorCode::NonMonotonePayment);
    auto bytes = commitment_signing_bytes(c);
    if (!verify(funder_key, bytes, c.funder_sig) || !verify(counterparty_key, bytes, c.counterparty_sig))
        throw Error(ErrorCode::InvalidSignature, "commitment lacks both signatures");

    channel.funder_balance = c.funder_balance;
    channel.counterparty_balance = c.counterparty_balance;
    channel.commitment_seq = c.seq;
    channel.latest = c;
}

Digest32 close_channel(Ledger& ledger, ChannelState& channel, const KeyPair& closer,
                       std::optional<ChannelCommitment> commitment)
{
    if (channel.phase != ChannelPhase::Open)
        throw Error(ErrorCode::ChannelNotOpen);
    if (!commitment)
        commitment = channel.latest;
    if (!commitment)
        throw Error(ErrorCode::StaleCommitment, "no signed commitment to close with");
    auto tx = make_tx(closer, ChannelUpdateClose{*commitment}, ledger.next_nonce(closer.address));
    auto h = ledger.submit(std::move(tx));
    channel.phase = ChannelPhase::Closed;
    return h;
}

} // namespace mpool
