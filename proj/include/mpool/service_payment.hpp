#pragma once

#include "mpool/crypto.hpp"

#include <cstdint>

namespace mpool {

using Amount = std::uint64_t;
using Height = std::uint64_t;

/// Off-chain payment from a pool creator to one target. `amount` is the
/// cumulative total owed to `target` by the pool identified by `cptx_hash`.
struct ServicePayment {
    Address target;
    Amount amount = 0;
    Digest32 cptx_hash;
    std::uint64_t tgt_seq = 0;
    Signature sigma;

    bool operator==(const ServicePayment&) const = default;
};

inline constexpr std::size_t kServicePaymentSigningSize = 20 + 8 + 32 + 8;

/// target (20) || amount (u64 BE) || cptxHash (32) || tgtSeq (u64 BE)
Bytes serialize_for_signing(const Address& target, Amount amount, const Digest32& cptx_hash,
                            std::uint64_t tgt_seq);
inline Bytes serialize_for_signing(const ServicePayment& sp)
{
    return serialize_for_signing(sp.target, sp.amount, sp.cptx_hash, sp.tgt_seq);
}

ServicePayment sign_service_payment(const SecretKey& payer, const Address& target, Amount amount,
                                    const Digest32& cptx_hash, std::uint64_t tgt_seq);

inline bool signature_valid(const ServicePayment& sp, const PublicKey& payer)
{
    return verify(payer, serialize_for_signing(sp), sp.sigma);
}

} // namespace mpool
