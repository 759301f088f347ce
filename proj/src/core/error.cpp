#include "coaat/error.hpp"

#include <array>
#include <utility>

namespace coaat {

namespace {

constexpr std::array<std::pair<Errc, std::string_view>, 35> kNames{{
    {Errc::Unauthorized, "Unauthorized"},
    {Errc::AlreadyInitialized, "AlreadyInitialized"},
    {Errc::NotInitialized, "NotInitialized"},
    {Errc::AddressAlreadyRegistered, "AddressAlreadyRegistered"},
    {Errc::InvalidRole, "InvalidRole"},
    {Errc::DuplicateProperty, "DuplicateProperty"},
    {Errc::MalformedCadastralRef, "MalformedCadastralRef"},
    {Errc::UnknownProperty, "UnknownProperty"},
    {Errc::UnknownDossier, "UnknownDossier"},
    {Errc::DossierAlreadyOpen, "DossierAlreadyOpen"},
    {Errc::DossierNotOpen, "DossierNotOpen"},
    {Errc::WrongStatus, "WrongStatus"},
    {Errc::EmptyDossier, "EmptyDossier"},
    {Errc::ReviewCountMismatch, "ReviewCountMismatch"},
    {Errc::SvcMismatch, "SvcMismatch"},
    {Errc::UnknownSvc, "UnknownSvc"},
    {Errc::NotYetValidated, "NotYetValidated"},
    {Errc::SignatureInvalid, "SignatureInvalid"},
    {Errc::UnknownSigner, "UnknownSigner"},
    {Errc::MissingSvcMarker, "MissingSvcMarker"},
    {Errc::MarkerAlreadyPresent, "MarkerAlreadyPresent"},
    {Errc::MalformedSvc, "MalformedSvc"},
    {Errc::NotFound, "NotFound"},
    {Errc::IntegrityViolation, "IntegrityViolation"},
    {Errc::ContentTooLarge, "ContentTooLarge"},
    {Errc::EmptyContent, "EmptyContent"},
    {Errc::DuplicateNonce, "DuplicateNonce"},
    {Errc::RejectedByContract, "RejectedByContract"},
    {Errc::ReplayDivergence, "ReplayDivergence"},
    {Errc::CorruptChain, "CorruptChain"},
    {Errc::MalformedPayload, "MalformedPayload"},
    {Errc::MalformedInput, "MalformedInput"},
    {Errc::IoError, "IoError"},
    {Errc::UnknownToken, "UnknownToken"},
    {Errc::InvalidKeyProof, "InvalidKeyProof"},
}};

std::string compose(Errc code, const std::string& detail)
{
    std::string msg{error_name(code)};
    if (!detail.empty())
        msg += ": " + detail;
    return msg;
}

}  // namespace

std::string_view error_name(Errc code) noexcept
{
    for (const auto& [c, name] : kNames)
        if (c == code)
            return name;
    return "Unknown";
}

std::optional<Errc> errc_from_name(std::string_view name) noexcept
{
    for (const auto& [c, n] : kNames)
        if (n == name)
            return c;
    return std::nullopt;
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(compose(code, detail)), code_(code), detail_(detail)
{
}

Error::Error(Errc code, Errc inner, const std::string& detail)
    : std::runtime_error(compose(code, std::string(error_name(inner)) +
                                           (detail.empty() ? "" : ": " + detail))),
      code_(code),
      inner_(inner),
      detail_(detail)
{
}

Error Error::rejected_by_contract(const Error& inner)
{
    return Error(Errc::RejectedByContract, inner.root(), inner.detail());
}

}  // namespace coaat
