#pragma once

// Canonical byte encoding shared by every message and transaction:
// integers are 8-byte big-endian, variable byte strings carry a 4-byte
// big-endian length prefix, fixed-size values (digests, addresses, keys,
// signatures) are written raw.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mpool {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView bytes);
/// Throws Error(DecodeError) on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

inline ByteView as_bytes(std::string_view s)
{
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

class ByteWriter {
public:
    ByteWriter& u8(std::uint8_t v)
    {
        out_.push_back(v);
        return *this;
    }
    ByteWriter& u32(std::uint32_t v);
    ByteWriter& u64(std::uint64_t v);
    ByteWriter& raw(ByteView v)
    {
        out_.insert(out_.end(), v.begin(), v.end());
        return *this;
    }
    template <std::size_t N>
    ByteWriter& raw(const std::array<std::uint8_t, N>& v)
    {
        return raw(ByteView(v));
    }
    ByteWriter& var(ByteView v);

    const Bytes& bytes() const& { return out_; }
    Bytes bytes() && { return std::move(out_); }

private:
    Bytes out_;
};

/// Bounds-checked cursor over an encoded buffer. Every read past the end
/// throws Error(DecodeError).
class ByteReader {
public:
    explicit ByteReader(ByteView in) : in_(in) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    Bytes var();
    template <std::size_t N>
    std::array<std::uint8_t, N> fixed()
    {
        std::array<std::uint8_t, N> out{};
        take(out.data(), N);
        return out;
    }

    std::size_t remaining() const noexcept { return in_.size() - pos_; }
    /// Throws if unread bytes remain.
    void expect_end() const;

private:
    void take(std::uint8_t* dst, std::size_t n);

    ByteView in_;
    std::size_t pos_ = 0;
};

} // namespace mpool
