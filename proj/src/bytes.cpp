#include "mpool/bytes.hpp"

#include "mpool/error.hpp"

#include <cstring>

namespace mpool {

std::string to_hex(ByteView bytes)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

namespace {

int nibble(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

} // namespace

Bytes from_hex(std::string_view hex)
{
    if (hex.size() % 2 != 0)
        throw Error(ErrorCode::DecodeError, "hex string has odd length");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = nibble(hex[2 * i]);
        int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0)
            throw Error(ErrorCode::DecodeError, "invalid hex character");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

ByteWriter& ByteWriter::u32(std::uint32_t v)
{
    for (int shift = 24; shift >= 0; shift -= 8)
        out_.push_back(static_cast<std::uint8_t>(v >> shift));
    return *this;
}

ByteWriter& ByteWriter::u64(std::uint64_t v)
{
    for (int shift = 56; shift >= 0; shift -= 8)
        out_.push_back(static_cast<std::uint8_t>(v >> shift));
    return *this;
}

ByteWriter& ByteWriter::var(ByteView v)
{
    u32(static_cast<std::uint32_t>(v.size()));
    return raw(v);
}

void ByteReader::take(std::uint8_t* dst, std::size_t n)
{
    if (remaining() < n)
        throw Error(ErrorCode::DecodeError, "truncated input");
    std::memcpy(dst, in_.data() + pos_, n);
    pos_ += n;
}

std::uint8_t ByteReader::u8()
{
    std::uint8_t v;
    take(&v, 1);
    return v;
}

std::uint32_t ByteReader::u32()
{
    std::uint8_t b[4];
    take(b, 4);
    std::uint32_t v = 0;
    for (auto x : b)
        v = (v << 8) | x;
    return v;
}

std::uint64_t ByteReader::u64()
{
    std::uint8_t b[8];
    take(b, 8);
    std::uint64_t v = 0;
    for (auto x : b)
        v = (v << 8) | x;
    return v;
}

Bytes ByteReader::var()
{
    auto n = u32();
    if (remaining() < n)
        throw Error(ErrorCode::DecodeError, "length prefix exceeds input");
    Bytes out(n);
    take(out.data(), n);
    return out;
}

void ByteReader::expect_end() const
{
    if (remaining() != 0)
        throw Error(ErrorCode::DecodeError, "trailing bytes");
}

} // namespace mpool
