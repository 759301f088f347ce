#include "coaat/decimal.hpp"

#include <limits>

#include "coaat/error.hpp"

namespace coaat {

namespace {

constexpr std::int64_t pow10(int n)
{
    std::int64_t v = 1;
    while (n-- > 0)
        v *= 10;
    return v;
}

std::int64_t checked(__int128 v)
{
    if (v < 0 || v > std::numeric_limits<std::int64_t>::max())
        throw Error(Errc::MalformedInput, "decimal overflow");
    return static_cast<std::int64_t>(v);
}

__int128 round_half_up(__int128 value, __int128 divisor)
{
    return (value + divisor / 2) / divisor;
}

}  // namespace

Decimal Decimal::parse(std::string_view text)
{
    auto dot = text.find('.');
    auto whole = text.substr(0, dot);
    auto frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if (whole.empty() || (dot != std::string_view::npos && frac.empty()) || frac.size() > kScale)
        throw Error(Errc::MalformedInput, "bad decimal '" + std::string(text) + "'");

    __int128 units = 0;
    for (char c : whole) {
        if (c < '0' || c > '9')
            throw Error(Errc::MalformedInput, "bad decimal '" + std::string(text) + "'");
        units = units * 10 + (c - '0');
        checked(units);
    }
    units *= kUnit;
    __int128 f = 0;
    for (char c : frac) {
        if (c < '0' || c > '9')
            throw Error(Errc::MalformedInput, "bad decimal '" + std::string(text) + "'");
        f = f * 10 + (c - '0');
    }
    units += f * pow10(kScale - static_cast<int>(frac.size()));
    return Decimal(checked(units));
}

std::string Decimal::to_string(int places) const
{
    if (places < 0 || places > kScale)
        throw Error(Errc::MalformedInput, "bad decimal precision");
    auto drop = pow10(kScale - places);
    if (units_ % drop != 0)
        throw Error(Errc::MalformedInput, "rendering would lose precision");
    auto whole = units_ / kUnit;
    auto frac = (units_ % kUnit) / drop;
    std::string out = std::to_string(whole);
    if (places > 0) {
        auto digits = std::to_string(frac);
        out += '.';
        out.append(static_cast<std::size_t>(places) - digits.size(), '0');
        out += digits;
    }
    return out;
}

Decimal Decimal::rounded(int places) const
{
    auto step = pow10(kScale - places);
    return Decimal(checked(round_half_up(units_, step) * step));
}

Decimal Decimal::mul_round(const Decimal& a, const Decimal& b, int places)
{
    // a.units * b.units is scaled by 1e16; bring it back to 10^-places.
    __int128 product = static_cast<__int128>(a.units_) * b.units_;
    __int128 divisor = static_cast<__int128>(kUnit) * pow10(kScale - places);
    return Decimal(checked(round_half_up(product, divisor) * pow10(kScale - places)));
}

Decimal Decimal::operator+(const Decimal& o) const
{
    return Decimal(checked(static_cast<__int128>(units_) + o.units_));
}

Decimal& Decimal::operator+=(const Decimal& o)
{
    *this = *this + o;
    return *this;
}

Decimal Decimal::operator*(std::uint64_t n) const
{
    return Decimal(checked(static_cast<__int128>(units_) * n));
}

}  // namespace coaat
