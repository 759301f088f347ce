#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "coaat/bytes.hpp"

namespace coaat {

// Canonical byte encoding: fields in declared order, integers big-endian
// fixed width, variable-length fields prefixed with a u32 length.
class Encoder {
public:
    Encoder& u8(std::uint8_t v);
    Encoder& u32(std::uint32_t v);
    Encoder& u64(std::uint64_t v);
    Encoder& fixed(ByteView v);
    Encoder& bytes(ByteView v);
    Encoder& str(std::string_view v) { return bytes(as_bytes(v)); }

    const Bytes& data() const noexcept { return buf_; }
    Bytes take() noexcept { return std::move(buf_); }

private:
    Bytes buf_;
};

/// Reads a canonical encoding; every malformed read throws MalformedPayload.
class Decoder {
public:
    explicit Decoder(ByteView data) : data_(data) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    ByteView fixed(std::size_t n);
    Bytes bytes();
    std::string str();

    template <std::size_t N>
    std::array<std::uint8_t, N> array()
    {
        auto view = fixed(N);
        std::array<std::uint8_t, N> out{};
        std::copy(view.begin(), view.end(), out.begin());
        return out;
    }

    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    bool done() const noexcept { return remaining() == 0; }
    void expect_done() const;

private:
    ByteView data_;
    std::size_t pos_ = 0;
};

}  // namespace coaat
