#pragma once

// Client side of a unidirectional two-party payment channel (funder pays
// counterparty). Only opening and closing touch the ledger; balance updates
// are exchanged off-chain as doubly-signed commitments.

#include "mpool/ledger.hpp"

namespace mpool {

enum class ChannelPhase { PendingOpen, Open, Closed };
std::string_view to_string(ChannelPhase p) noexcept;

struct ChannelState {
    Digest32 channel_id;
    Address funder;
    Address counterparty;
    Amount capacity = 0;
    Amount funder_balance = 0;
    Amount counterparty_balance = 0;
    std::uint64_t commitment_seq = 0;
    ChannelPhase phase = ChannelPhase::PendingOpen;
    /// Height of the block that included the open tx, once known.
    std::optional<Height> open_height;
    std::optional<ChannelCommitment> latest;

    /// Height at which the channel becomes usable, given confirmation depth d.
    std::optional<Height> usable_height(Height confirmation_depth) const
    {
        if (!open_height)
            return std::nullopt;
        return *open_height + confirmation_depth;
    }
};

/// Submits the ChannelOpen tx. Throws Error(InsufficientBalance) if the
/// funder cannot lock `capacity` (checked against current balance).
ChannelState open_channel(Ledger& ledger, const KeyPair& funder, const PublicKey& counterparty,
                          Amount capacity);

/// PendingOpen -> Open once the open tx is `confirmation_depth` blocks deep.
void refresh(ChannelState& channel, const Ledger& ledger);

/// Both parties sign the split after paying `amount` from funder to
/// counterparty. Throws NotOpen (ChannelNotOpen) or NonMonotonePayment.
ChannelCommitment propose_payment(const ChannelState& channel, Amount amount,
                                  const KeyPair& funder, const KeyPair& counterparty);

/// Accepts a commitment: checks both signatures, the sum and that the
/// funder's balance strictly decreases. Throws ChannelNotOpen,
/// BalancesDontSum, NonMonotonePayment or InvalidSignature.
void update_commitment(ChannelState& channel, const ChannelCommitment& commitment,
                       const PublicKey& funder_key, const PublicKey& counterparty_key);

/// Submits a ChannelUpdateClose carrying `commitment` (the latest one if
/// omitted). Throws Error(ChannelNotOpen) unless the channel is Open.
Digest32 close_channel(Ledger& ledger, ChannelState& channel, const KeyPair& closer,
                       std::optional<ChannelCommitment> commitment = std::nullopt);

/// Opening split {capacity, 0} at seq 0, signed by both.
ChannelCommitment initial_commitment(const ChannelState& channel, const KeyPair& funder,
                                     const KeyPair& counterparty);

} // namespace mpool
