#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace coaat {

/// Protocol-level error names. The textual name of each value is part of the
/// wire contract: HTTP error bodies and CLI stderr carry it verbatim.
enum class Errc {
    // contracts
    Unauthorized,
    AlreadyInitialized,
    NotInitialized,
    AddressAlreadyRegistered,
    InvalidRole,
    DuplicateProperty,
    MalformedCadastralRef,
    UnknownProperty,
    UnknownDossier,
    DossierAlreadyOpen,
    DossierNotOpen,
    WrongStatus,
    EmptyDossier,
    ReviewCountMismatch,
    SvcMismatch,
    UnknownSvc,
    NotYetValidated,
    // documents
    SignatureInvalid,
    UnknownSigner,
    MissingSvcMarker,
    MarkerAlreadyPresent,
    MalformedSvc,
    // cas
    NotFound,
    IntegrityViolation,
    ContentTooLarge,
    EmptyContent,
    // ledger
    DuplicateNonce,
    RejectedByContract,
    ReplayDivergence,
    CorruptChain,
    // plumbing
    MalformedPayload,
    MalformedInput,
    IoError,
    UnknownToken,
    InvalidKeyProof,
};

std::string_view error_name(Errc code) noexcept;
std::optional<Errc> errc_from_name(std::string_view name) noexcept;

class Error : public std::runtime_error {
public:
    explicit Error(Errc code, const std::string& detail = {});

    // RejectedByContract carrying the contract layer's own error.
    static Error rejected_by_contract(const Error& inner);

    Errc code() const noexcept { return code_; }
    std::optional<Errc> inner() const noexcept { return inner_; }
    const std::string& detail() const noexcept { return detail_; }

    // The innermost protocol error: inner() when present, otherwise code().
    Errc root() const noexcept { return inner_.value_or(code_); }

private:
    Error(Errc code, Errc inner, const std::string& detail);

    Errc code_;
    std::optional<Errc> inner_;
    std::string detail_;
};

}  // namespace coaat
