#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coaat/address.hpp"
#include "coaat/cas.hpp"
#include "coaat/documents.hpp"
#include "coaat/ledger.hpp"

namespace coaat {

enum class Role : std::uint8_t {
    SystemAdmin = 0,
    CoaatAdmin = 1,
    CoaatStaff = 2,
    ReadOnly = 3,
};

std::string_view to_string(Role role) noexcept;
std::optional<Role> role_from_int(int value) noexcept;

using CoaatId = std::uint32_t;  // 0 means "no COAAT"

struct UserRecord {
    Address address;
    Role role = Role::ReadOnly;
    Address registered_by;
    CoaatId coaat_id = 0;
    std::string name;
};

struct Coaat {
    CoaatId id = 0;
    std::string name;
    Address admin;
};

enum class DossierStatus : std::uint8_t {
    Open = 0,
    PendingValidation = 1,
    Validated = 2,
    Rejected = 3,
};

std::string_view to_string(DossierStatus status) noexcept;
std::optional<DossierStatus> parse_dossier_status(std::string_view name) noexcept;

constexpr bool is_terminal(DossierStatus s) noexcept
{
    return s == DossierStatus::Validated || s == DossierStatus::Rejected;
}

/// "<cadastral ref>-<sequence>", sequence starting at 1 per property.
struct DossierId {
    std::string cadastral_ref;
    std::uint32_t seq = 0;

    static DossierId parse(std::string_view text);
    std::string to_string() const;

    auto operator<=>(const DossierId&) const = default;
};

enum class DocumentVersion : std::uint8_t { Submitted = 0, Reviewed = 1 };

std::string_view to_string(DocumentVersion version) noexcept;

struct DocumentRecord {
    Svc svc;
    Cid cid;
    DocumentVersion version = DocumentVersion::Submitted;
    Address uploader;
    Hash32 tx_hash{};
    std::uint64_t timestamp = 0;
    Hash32 signature{};
    // Reviewed records point at the index of the Submitted record they review.
    std::optional<std::uint32_t> reviews;
};

struct Dossier {
    DossierId id;
    Address creator;
    DossierStatus status = DossierStatus::Open;
    std::string metadata;
    std::vector<DocumentRecord> documents;
    std::uint64_t created_at = 0;
    std::uint64_t decided_at = 0;
    Address decided_by;

    std::size_t submitted_count() const noexcept;
};

struct Property {
    std::string cadastral_ref;
    std::string cadastral_data;
    Address registered_by;
    Address contract_id;
    CoaatId coaat = 0;  // validating COAAT, bound by the first dossier
    std::vector<Dossier> dossiers;

    const Dossier* open_dossier() const noexcept;
};

// 20 characters, A-Z and 0-9.
bool cadastral_ref_valid(std::string_view ref) noexcept;

enum class EventKind : std::uint8_t { DossierSubmitted = 0, DossierStatusChanged = 1 };

std::string_view to_string(EventKind kind) noexcept;

struct Event {
    EventId id = 0;
    EventKind kind = EventKind::DossierSubmitted;
    DossierId dossier;
    Role audience = Role::CoaatAdmin;
    DossierStatus status = DossierStatus::Open;
    CoaatId coaat = 0;
    std::uint64_t timestamp = 0;
};

/// Transaction payloads, one per TxKind. encode() is the canonical on-chain
/// byte form; decode() rejects trailing bytes.
namespace payload {

struct AddCoaat {
    Address admin;
    std::string coaat_name;
    std::string admin_name;
};

struct AddUser {
    Address user;
    Role role = Role::ReadOnly;
    std::string name;
};

struct RegisterProperty {
    std::string cadastral_ref;
    std::string cadastral_data;
};

struct CreateDossier {
    std::string cadastral_ref;
    std::string metadata;
};

struct AddFile {
    DossierId dossier;
    Svc svc;
    Cid cid;
    Hash32 signature{};
};

struct RequestValidation {
    DossierId dossier;
};

struct ReviewedFile {
    Svc svc;
    Cid cid;
    Hash32 signature{};
};

struct ValidateDossier {
    DossierId dossier;
    DossierStatus decision = DossierStatus::Validated;
    std::vector<ReviewedFile> reviewed;
};

Bytes encode(const AddCoaat& p);
Bytes encode(const AddUser& p);
Bytes encode(const RegisterProperty& p);
Bytes encode(const CreateDossier& p);
Bytes encode(const AddFile& p);
Bytes encode(const RequestValidation& p);
Bytes encode(const ValidateDossier& p);

template <class T>
T decode(ByteView bytes);

}  // namespace payload

/// The contract factory plus every property contract, as one deterministic
/// state machine driven by ledger transactions.
class ContractState final : public Application {
public:
    struct SvcLocation {
        DossierId dossier;
        std::size_t index = 0;
    };

    std::vector<EventId> apply(const Transaction& tx, const Hash32& tx_hash) override;

    // Runs every on-chain check apply() would, without mutating.
    void validate(const Transaction& tx) const;

    Bytes snapshot() const override;
    void restore(ByteView snapshot) override;

    bool initialized() const noexcept { return initialized_; }
    const UserRecord* find_user(const Address& address) const;
    const Property* find_property(std::string_view ref) const;
    const Dossier* find_dossier(const DossierId& id) const;
    std::optional<SvcLocation> find_svc(const Svc& svc) const;

    const std::map<Address, UserRecord>& users() const noexcept { return users_; }
    const std::vector<Coaat>& coaats() const noexcept { return coaats_; }
    const std::map<std::string, Property>& properties() const noexcept { return properties_; }
    const std::vector<Event>& events() const noexcept { return events_; }

private:
    struct Checked;

    Checked check(const Transaction& tx) const;
    std::vector<EventId> mutate(const Transaction& tx, const Hash32& tx_hash, Checked& checked);

    const UserRecord& registered(const Address& sender) const;
    Dossier* mutable_dossier(const DossierId& id);
    EventId emit(EventKind kind, const DossierId& dossier, Role audience, DossierStatus status,
                 CoaatId coaat, std::uint64_t timestamp);

    bool initialized_ = false;
    Address system_admin_;
    std::map<Address, UserRecord> users_;
    std::vector<Coaat> coaats_;
    std::map<std::string, Property> properties_;
    std::vector<Event> events_;
    std::map<Svc, SvcLocation> svc_index_;  // derived, rebuilt on restore
};

}  // namespace coaat
