#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "coaat/bytes.hpp"

namespace coaat {

/// Wallet-style 20-byte identity, rendered as "0x" + 40 lowercase hex digits.
class Address {
public:
    static constexpr std::size_t kSize = 20;

    constexpr Address() = default;
    explicit constexpr Address(const std::array<std::uint8_t, kSize>& bytes) : bytes_(bytes) {}

    static Address parse(std::string_view text);

    std::string to_string() const;
    const std::array<std::uint8_t, kSize>& bytes() const noexcept { return bytes_; }
    bool is_zero() const noexcept;

    constexpr auto operator<=>(const Address&) const = default;

private:
    std::array<std::uint8_t, kSize> bytes_{};
};

}  // namespace coaat

template <>
struct std::hash<coaat::Address> {
    std::size_t operator()(const coaat::Address& a) const noexcept
    {
        std::size_t h = 0;
        for (auto b : a.bytes())
            h = h * 131 + b;
        return h;
    }
};
