#include <algorithm>
#include <array>
#include <charconv>

#include "coaat/contracts.hpp"

namespace coaat {

std::string_view to_string(Role role) noexcept
{
    switch (role) {
    case Role::SystemAdmin:
        return "SystemAdmin";
    case Role::CoaatAdmin:
        return "CoaatAdmin";
    case Role::CoaatStaff:
        return "CoaatStaff";
    case Role::ReadOnly:
        return "ReadOnly";
    }
    return "Unknown";
}

std::optional<Role> role_from_int(int value) noexcept
{
    if (value < 0 || value > 3)
        return std::nullopt;
    return static_cast<Role>(value);
}

namespace {

constexpr std::array<std::string_view, 4> kStatusNames{"Open", "PendingValidation", "Validated",
                                                        "Rejected"};

}  // namespace

std::string_view to_string(DossierStatus status) noexcept
{
    auto i = static_cast<std::size_t>(status);
    return i < kStatusNames.size() ? kStatusNames[i] : "Unknown";
}

std::optional<DossierStatus> parse_dossier_status(std::string_view name) noexcept
{
    for (std::size_t i = 0; i < kStatusNames.size(); ++i)
        if (kStatusNames[i] == name)
            return static_cast<DossierStatus>(i);
    return std::nullopt;
}

std::string_view to_string(DocumentVersion version) noexcept
{
    return version == DocumentVersion::Submitted ? "Submitted" : "Reviewed";
}

std::string_view to_string(EventKind kind) noexcept
{
    return kind == EventKind::DossierSubmitted ? "DossierSubmitted" : "DossierStatusChanged";
}

DossierId DossierId::parse(std::string_view text)
{
    auto dash = text.rfind('-');
    if (dash == std::string_view::npos || dash + 1 >= text.size())
        throw Error(Errc::MalformedInput, "dossier id must be <ref>-<seq>");
    DossierId id;
    id.cadastral_ref = std::string(text.substr(0, dash));
    auto digits = text.substr(dash + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id.seq);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || id.seq == 0)
        throw Error(Errc::MalformedInput, "bad dossier sequence in '" + std::string(text) + "'");
    return id;
}

std::string DossierId::to_string() const
{
    return cadastral_ref + "-" + std::to_string(seq);
}

std::size_t Dossier::submitted_count() const noexcept
{
    return static_cast<std::size_t>(std::count_if(documents.begin(), documents.end(), [](const auto& d) {
        return d.version == DocumentVersion::Submitted;
    }));
}

const Dossier* Property::open_dossier() const noexcept
{
    for (const auto& d : dossiers)
        if (!is_terminal(d.status))
            return &d;
    return nullptr;
}

bool cadastral_ref_valid(std::string_view ref) noexcept
{
    return ref.size() == 20 && std::all_of(ref.begin(), ref.end(), [](char c) {
               return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
           });
}

}  // namespace coaat
