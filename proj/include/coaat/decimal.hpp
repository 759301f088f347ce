#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace coaat {

/// Non-negative exact decimal with 8 fractional digits, stored as an integer
/// count of 1e-8 units. Fees never touch binary floating point.
class Decimal {
public:
    static constexpr int kScale = 8;
    static constexpr std::int64_t kUnit = 100'000'000;

    constexpr Decimal() = default;

    static constexpr Decimal from_units(std::int64_t units) { return Decimal(units); }

    // "12", "0.00238626", "302.8". More than 8 fractional digits, signs,
    // exponents and empty strings are rejected with MalformedInput.
    static Decimal parse(std::string_view text);

    constexpr std::int64_t units() const noexcept { return units_; }

    // Fixed rendering with exactly `places` fractional digits (0..8); must not
    // lose precision, use rounded() first when narrowing.
    std::string to_string(int places = kScale) const;

    // Half-up rounding to `places` fractional digits.
    Decimal rounded(int places) const;

    // a * b rounded half-up to `places` digits, computed exactly in 128 bits.
    static Decimal mul_round(const Decimal& a, const Decimal& b, int places);

    Decimal operator+(const Decimal& o) const;
    Decimal& operator+=(const Decimal& o);
    Decimal operator*(std::uint64_t n) const;

    constexpr auto operator<=>(const Decimal&) const = default;

private:
    constexpr explicit Decimal(std::int64_t units) : units_(units) {}

    std::int64_t units_ = 0;
};

}  // namespace coaat
