#include "mpool/service_payment.hpp"

namespace mpool {

Bytes serialize_for_signing(const Address& target, Amount amount, const Digest32& cptx_hash,
                            std::uint64_t tgt_seq)
{
    return ByteWriter().raw(target.bytes).u64(amount).raw(cptx_hash.bytes).u64(tgt_seq).bytes();
}

ServicePayment sign_service_payment(const SecretKey& payer, const Address& target, Amount amount,
                                    const Digest32& cptx_hash, std::uint64_t tgt_seq)
{
    ServicePayment sp{target, amount, cptx_hash, tgt_seq, {}};
    sp.sigma = sign(payer, serialize_for_signing(sp));
    return sp;
}

} // namespace mpool
