#include "coaat/codec.hpp"

#include <limits>

namespace coaat {

Encoder& Encoder::u8(std::uint8_t v)
{
    buf_.push_back(v);
    return *this;
}

Encoder& Encoder::u32(std::uint32_t v)
{
    for (int shift = 24; shift >= 0; shift -= 8)
        buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    return *this;
}

Encoder& Encoder::u64(std::uint64_t v)
{
    for (int shift = 56; shift >= 0; shift -= 8)
        buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    return *this;
}

Encoder& Encoder::fixed(ByteView v)
{
    buf_.insert(buf_.end(), v.begin(), v.end());
    return *this;
}

Encoder& Encoder::bytes(ByteView v)
{
    if (v.size() > std::numeric_limits<std::uint32_t>::max())
        throw Error(Errc::MalformedPayload, "field exceeds u32 length prefix");
    u32(static_cast<std::uint32_t>(v.size()));
    return fixed(v);
}

ByteView Decoder::fixed(std::size_t n)
{
    if (remaining() < n)
        throw Error(Errc::MalformedPayload, "truncated input");
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::uint8_t Decoder::u8()
{
    return fixed(1)[0];
}

std::uint32_t Decoder::u32()
{
    std::uint32_t v = 0;
    for (auto b : fixed(4))
        v = v << 8 | b;
    return v;
}

std::uint64_t Decoder::u64()
{
    std::uint64_t v = 0;
    for (auto b : fixed(8))
        v = v << 8 | b;
    return v;
}

Bytes Decoder::bytes()
{
    auto len = u32();
    auto view = fixed(len);
    return {view.begin(), view.end()};
}

std::string Decoder::str()
{
    auto len = u32();
    return to_string(fixed(len));
}

void Decoder::expect_done() const
{
    if (!done())
        throw Error(Errc::MalformedPayload, "trailing bytes");
}

}  // namespace coaat
