#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coaat/error.hpp"

namespace coaat {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
using Hash32 = std::array<std::uint8_t, 32>;

std::string to_hex(ByteView bytes);

// Accepts an optional "0x" prefix and either letter case. Throws MalformedInput.
Bytes from_hex(std::string_view hex);

inline ByteView as_bytes(std::string_view s)
{
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s)
{
    auto view = as_bytes(s);
    return {view.begin(), view.end()};
}

inline std::string to_string(ByteView bytes)
{
    return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

template <std::size_t N>
std::array<std::uint8_t, N> fixed_from_hex(std::string_view hex)
{
    auto bytes = from_hex(hex);
    if (bytes.size() != N)
        throw Error(Errc::MalformedInput, "expected " + std::to_string(N) + " hex bytes");
    std::array<std::uint8_t, N> out{};
    std::copy(bytes.begin(), bytes.end(), out.begin());
    return out;
}

}  // namespace coaat
