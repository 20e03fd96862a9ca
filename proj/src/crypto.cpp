#include "mpool/crypto.hpp"

#include "mpool/error.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace mpool {

namespace {

void ensure_sodium()
{
    static const bool ready = [] {
        if (sodium_init() < 0)
            throw std::runtime_error("libsodium initialisation failed");
        return true;
    }();
    (void)ready;
}

} // namespace

template <std::size_t N, typename Tag>
FixedBytes<N, Tag> FixedBytes<N, Tag>::from_hex(std::string_view hex)
{
    auto raw = mpool::from_hex(hex);
    if (raw.size() != N)
        throw Error(ErrorCode::DecodeError, "expected " + std::to_string(N) + " bytes");
    FixedBytes out;
    std::copy(raw.begin(), raw.end(), out.bytes.begin());
    return out;
}

template struct FixedBytes<32, DigestTag>;
template struct FixedBytes<20, AddressTag>;
template struct FixedBytes<32, PublicKeyTag>;
template struct FixedBytes<64, SecretKeyTag>;
template struct FixedBytes<64, SignatureTag>;

Digest32 hash(ByteView data)
{
    ensure_sodium();
    Digest32 out;
    crypto_hash_sha256(out.bytes.data(), data.data(), data.size());
    return out;
}

Digest32 hash_pair(const Digest32& left, const Digest32& right)
{
    std::array<std::uint8_t, 64> buf;
    std::memcpy(buf.data(), left.bytes.data(), 32);
    std::memcpy(buf.data() + 32, right.bytes.data(), 32);
    return hash(buf);
}

Address address_of(const PublicKey& key)
{
    auto digest = hash(key.view());
    Address out;
    std::copy_n(digest.bytes.begin(), Address::size, out.bytes.begin());
    return out;
}

KeyPair keygen(const Seed& seed)
{
    ensure_sodium();
    KeyPair kp;
    crypto_sign_seed_keypair(kp.public_key.bytes.data(), kp.secret_key.bytes.data(), seed.data());
    kp.address = address_of(kp.public_key);
    return kp;
}

Seed seed_from(std::string_view label, std::uint64_t salt)
{
    auto bytes = ByteWriter().var(as_bytes(label)).u64(salt).bytes();
    return hash(bytes).bytes;
}

Signature sign(const SecretKey& secret_key, ByteView message)
{
    ensure_sodium();
    Signature sig;
    crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(),
                         secret_key.bytes.data());
    return sig;
}

bool verify(const PublicKey& public_key, ByteView message, const Signature& signature)
{
    ensure_sodium();
    return crypto_sign_verify_detached(signature.bytes.data(), message.data(), message.size(),
                                       public_key.bytes.data()) == 0;
}

namespace {

std::vector<Digest32> next_level(const std::vector<Digest32>& level)
{
    std::vector<Digest32> up;
    up.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i < level.size(); i += 2) {
        const auto& left = level[i];
        const auto& right = i + 1 < level.size() ? level[i + 1] : level[i];
        up.push_back(hash_pair(left, right));
    }
    return up;
}

} // namespace

Digest32 merkle_root(std::span<const Digest32> leaves)
{
    if (leaves.empty())
        throw Error(ErrorCode::EmptyTree);
    std::vector<Digest32> level(leaves.begin(), leaves.end());
    while (level.size() > 1)
        level = next_level(level);
    return level.front();
}

MerkleProof merkle_prove(std::span<const Digest32> leaves, std::uint64_t index)
{
    if (leaves.empty())
        throw Error(ErrorCode::EmptyTree);
    if (index >= leaves.size())
        throw Error(ErrorCode::IndexOutOfRange, "merkle leaf index out of range");

    MerkleProof proof;
    proof.leaf_index = index;
    proof.leaf_count = leaves.size();
    std::vector<Digest32> level(leaves.begin(), leaves.end());
    auto pos = index;
    while (level.size() > 1) {
        auto sibling = pos ^ 1u;
        proof.siblings.push_back(sibling < level.size() ? level[sibling] : level[pos]);
        level = next_level(level);
        pos /= 2;
    }
    return proof;
}

bool merkle_verify(const Digest32& root, const Digest32& leaf, const MerkleProof& proof)
{
    if (proof.leaf_count == 0 || proof.leaf_index >= proof.leaf_count)
        return false;

    std::size_t depth = 0;
    for (auto n = proof.leaf_count; n > 1; n = (n + 1) / 2)
        ++depth;
    if (proof.siblings.size() != depth)
        return false;

    auto node = leaf;
    auto pos = proof.leaf_index;
    auto width = proof.leaf_count;
    for (const auto& sibling : proof.siblings) {
        bool is_right = (pos & 1u) != 0;
        // a lone last node must be paired with itself
        if (!is_right && pos + 1 == width && sibling != node)
            return false;
        node = is_right ? hash_pair(sibling, node) : hash_pair(node, sibling);
        pos /= 2;
        width = (width + 1) / 2;
    }
    return node == root;
}

} // namespace mpool
