#pragma once

// Hashing, signatures and binary Merkle trees.
//
// hash       SHA-256
// signature  Ed25519 (deterministic, 64-byte signatures)
// address    first 20 bytes of hash(publicKey)
//
// Merkle convention: parent = hash(left || right); an odd node at any level
// is paired with itself; the root of a single leaf is the leaf itself.

#include "mpool/bytes.hpp"

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mpool {

template <std::size_t N, typename Tag>
struct FixedBytes {
    static constexpr std::size_t size = N;
    std::array<std::uint8_t, N> bytes{};

    auto operator<=>(const FixedBytes&) const = default;
    bool operator==(const FixedBytes&) const = default;

    ByteView view() const noexcept { return bytes; }
    std::string hex() const { return to_hex(bytes); }
    bool is_zero() const noexcept
    {
        return std::all_of(bytes.begin(), bytes.end(), [](auto b) { return b == 0; });
    }
    /// Throws Error(DecodeError) unless `hex` encodes exactly N bytes.
    static FixedBytes from_hex(std::string_view hex);
};

struct DigestTag;
struct AddressTag;
struct PublicKeyTag;
struct SecretKeyTag;
struct SignatureTag;

using Digest32 = FixedBytes<32, DigestTag>;
using Address = FixedBytes<20, AddressTag>;
using PublicKey = FixedBytes<32, PublicKeyTag>;
using SecretKey = FixedBytes<64, SecretKeyTag>;
using Signature = FixedBytes<64, SignatureTag>;
using Seed = std::array<std::uint8_t, 32>;

struct KeyPair {
    SecretKey secret_key;
    PublicKey public_key;
    Address address;
};

Digest32 hash(ByteView data);
Digest32 hash_pair(const Digest32& left, const Digest32& right);

Address address_of(const PublicKey& key);
KeyPair keygen(const Seed& seed);
/// Seed derived from an arbitrary label; handy for reproducible actors.
Seed seed_from(std::string_view label, std::uint64_t salt = 0);

Signature sign(const SecretKey& secret_key, ByteView message);
/// Malformed keys or signatures yield false.
bool verify(const PublicKey& public_key, ByteView message, const Signature& signature);

struct MerkleProof {
    std::uint64_t leaf_index = 0;
    std::uint64_t leaf_count = 0;
    std::vector<Digest32> siblings;

    bool operator==(const MerkleProof&) const = default;
};

/// Throws Error(EmptyTree) on an empty leaf list.
Digest32 merkle_root(std::span<const Digest32> leaves);
/// Throws Error(EmptyTree) or Error(IndexOutOfRange).
MerkleProof merkle_prove(std::span<const Digest32> leaves, std::uint64_t index);
bool merkle_verify(const Digest32& root, const Digest32& leaf, const MerkleProof& proof);

} // namespace mpool

template <std::size_t N, typename Tag>
struct std::hash<mpool::FixedBytes<N, Tag>> {
    std::size_t operator()(const mpool::FixedBytes<N, Tag>& v) const noexcept
    {
        std::size_t h = 0;
        for (std::size_t i = 0; i < sizeof(std::size_t) && i < N; ++i)
            h = (h << 8) | v.bytes[i];
        return h;
    }
};
