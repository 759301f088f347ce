#include "coaat/address.hpp"

#include <algorithm>

namespace coaat {

Address Address::parse(std::string_view text)
{
    if (!text.starts_with("0x") || text.size() != 2 + 2 * kSize)
        throw Error(Errc::MalformedInput, "address must be 0x + 40 hex digits");
    return Address(fixed_from_hex<kSize>(text));
}

std::string Address::to_string() const
{
    return "0x" + to_hex(bytes_);
}

bool Address::is_zero() const noexcept
{
    return std::all_of(bytes_.begin(), bytes_.end(), [](auto b) { return b == 0; });
}

}  // namespace coaat
