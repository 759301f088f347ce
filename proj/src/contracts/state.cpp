#include <set>
#include <variant>

#include "coaat/codec.hpp"
#include "coaat/contracts.hpp"
#include "coaat/crypto.hpp"

namespace coaat {

struct ContractState::Checked {
    std::variant<std::monostate, payload::AddCoaat, payload::AddUser, payload::RegisterProperty,
                 payload::CreateDossier, payload::AddFile, payload::RequestValidation,
                 payload::ValidateDossier>
        body;
};

namespace {

bool is_staff_or_admin(Role role)
{
    return role == Role::CoaatAdmin || role == Role::CoaatStaff;
}

Address property_contract_id(std::string_view ref)
{
    auto digest = Sha256{}.update("coaat/property/v1").update(ref).finish();
    std::array<std::uint8_t, Address::kSize> out{};
    std::copy(digest.end() - Address::kSize, digest.end(), out.begin());
    return Address(out);
}

}  // namespace

const UserRecord* ContractState::find_user(const Address& address) const
{
    auto it = users_.find(address);
    return it == users_.end() ? nullptr : &it->second;
}

const Property* ContractState::find_property(std::string_view ref) const
{
    auto it = properties_.find(std::string(ref));
    return it == properties_.end() ? nullptr : &it->second;
}

const Dossier* ContractState::find_dossier(const DossierId& id) const
{
    const auto* property = find_property(id.cadastral_ref);
    if (property == nullptr || id.seq == 0 || id.seq > property->dossiers.size())
        return nullptr;
    return &property->dossiers[id.seq - 1];
}

Dossier* ContractState::mutable_dossier(const DossierId& id)
{
    return const_cast<Dossier*>(find_dossier(id));
}

std::optional<ContractState::SvcLocation> ContractState::find_svc(const Svc& svc) const
{
    auto it = svc_index_.find(svc);
    if (it == svc_index_.end())
        return std::nullopt;
    return it->second;
}

const UserRecord& ContractState::registered(const Address& sender) const
{
    if (!initialized_)
        throw Error(Errc::NotInitialized);
    const auto* user = find_user(sender);
    if (user == nullptr)
        throw Error(Errc::Unauthorized, sender.to_string() + " is not registered");
    return *user;
}

void ContractState::validate(const Transaction& tx) const
{
    check(tx);
}

ContractState::Checked ContractState::check(const Transaction& tx) const
{
    Checked out;
    switch (tx.kind) {
    case TxKind::Kickoff: {
        if (initialized_)
            throw Error(Errc::AlreadyInitialized);
        if (!tx.payload.empty())
            throw Error(Errc::MalformedPayload, "kickoff carries no payload");
        break;
    }
    case TxKind::AddCoaat: {
        const auto& caller = registered(tx.sender);
        auto p = payload::decode<payload::AddCoaat>(tx.payload);
        if (caller.role != Role::SystemAdmin)
            throw Error(Errc::Unauthorized, "only the system administrator adds COAATs");
        if (users_.contains(p.admin))
            throw Error(Errc::AddressAlreadyRegistered, p.admin.to_string());
        out.body = std::move(p);
        break;
    }
    case TxKind::AddUser: {
        const auto& caller = registered(tx.sender);
        auto p = payload::decode<payload::AddUser>(tx.payload);
        if (caller.role != Role::CoaatAdmin)
            throw Error(Errc::Unauthorized, "only COAAT administrators add users");
        if (p.role != Role::CoaatStaff && p.role != Role::ReadOnly)
            throw Error(Errc::InvalidRole, std::string(to_string(p.role)));
        if (users_.contains(p.user))
            throw Error(Errc::AddressAlreadyRegistered, p.user.to_string());
        out.body = std::move(p);
        break;
    }
    case TxKind::RegisterProperty: {
        const auto& caller = registered(tx.sender);
        auto p = payload::decode<payload::RegisterProperty>(tx.payload);
        if (!is_staff_or_admin(caller.role))
            throw Error(Errc::Unauthorized, "property registration needs Role 1 or 2");
        if (!cadastral_ref_valid(p.cadastral_ref))
            throw Error(Errc::MalformedCadastralRef, p.cadastral_ref);
        if (properties_.contains(p.cadastral_ref))
            throw Error(Errc::DuplicateProperty, p.cadastral_ref);
        out.body = std::move(p);
        break;
    }
    case TxKind::CreateDossier: {
        const auto& caller = registered(tx.sender);
        auto p = payload::decode<payload::CreateDossier>(tx.payload);
        if (!is_staff_or_admin(caller.role))
            throw Error(Errc::Unauthorized, "dossiers are managed by Role 1 or 2");
        const auto* property = find_property(p.cadastral_ref);
        if (property == nullptr)
            throw Error(Errc::UnknownProperty, p.cadastral_ref);
        if (property->coaat != 0 && property->coaat != caller.coaat_id)
            throw Error(Errc::Unauthorized, "property is bound to another COAAT");
        if (property->open_dossier() != nullptr)
            throw Error(Errc::DossierAlreadyOpen, property->open_dossier()->id.to_string());
        out.body = std::move(p);
        break;
    }
    case TxKind::AddFile: {
        const auto& caller = registered(tx.sender);
        auto p = payload::decode<payload::AddFile>(tx.payload);
        if (!is_staff_or_admin(caller.role))
            throw Error(Errc::Unauthorized);
        const auto* dossier = find_dossier(p.dossier);
        if (dossier == nullptr)
            throw Error(Errc::UnknownDossier, p.dossier.to_string());
        if (dossier->creator != tx.sender)
            throw Error(Errc::Unauthorized, "only the dossier creator adds documents");
        if (dossier->status != DossierStatus::Open)
            throw Error(Errc::DossierNotOpen, std::string(to_string(dossier->status)));
        if (svc_index_.contains(p.svc))
            throw Error(Errc::SvcMismatch, "SVC already recorded");
        out.body = std::move(p);
        break;
    }
    case TxKind::RequestValidation: {
        const auto& caller = registered(tx.sender);
        auto p = payload::decode<payload::RequestValidation>(tx.payload);
        if (!is_staff_or_admin(caller.role))
            throw Error(Errc::Unauthorized);
        const auto* dossier = find_dossier(p.dossier);
        if (dossier == nullptr)
            throw Error(Errc::UnknownDossier, p.dossier.to_string());
        if (dossier->creator != tx.sender)
            throw Error(Errc::Unauthorized, "only the dossier creator requests validation");
        if (dossier->status != DossierStatus::Open)
            throw Error(Errc::WrongStatus, std::string(to_string(dossier->status)));
        if (dossier->submitted_count() == 0)
            throw Error(Errc::EmptyDossier);
        out.body = std::move(p);
        break;
    }
    case TxKind::ValidateDossier: {
        const auto& caller = registered(tx.sender);
        auto p = payload::decode<payload::ValidateDossier>(tx.payload);
        if (caller.role != Role::CoaatAdmin)
            throw Error(Errc::Unauthorized, "only COAAT administrators validate");
        const auto* dossier = find_dossier(p.dossier);
        if (dossier == nullptr)
            throw Error(Errc::UnknownDossier, p.dossier.to_string());
        if (find_property(p.dossier.cadastral_ref)->coaat != caller.coaat_id)
            throw Error(Errc::Unauthorized, "dossier belongs to another COAAT");
        if (dossier->status != DossierStatus::PendingValidation)
            throw Error(Errc::WrongStatus, std::string(to_string(dossier->status)));
        if (!is_terminal(p.decision))
            throw Error(Errc::MalformedPayload, "decision must be Validated or Rejected");
        if (p.reviewed.size() != dossier->submitted_count())
            throw Error(Errc::ReviewCountMismatch);
        std::set<Svc> fresh;
        for (const auto& r : p.reviewed)
            if (svc_index_.contains(r.svc) || !fresh.insert(r.svc).second)
                throw Error(Errc::SvcMismatch, "reviewed SVC " + r.svc.str() + " is not fresh");
        out.body = std::move(p);
        break;
    }
    }
    return out;
}

std::vector<EventId> ContractState::apply(const Transaction& tx, const Hash32& tx_hash)
{
    auto checked = check(tx);
    return mutate(tx, tx_hash, checked);
}

EventId ContractState::emit(EventKind kind, const DossierId& dossier, Role audience,
                            DossierStatus status, CoaatId coaat, std::uint64_t timestamp)
{
    Event e{events_.size() + 1, kind, dossier, audience, status, coaat, timestamp};
    events_.push_back(e);
    return e.id;
}

std::vector<EventId> ContractState::mutate(const Transaction& tx, const Hash32& tx_hash,
                                           Checked& checked)
{
    std::vector<EventId> emitted;
    switch (tx.kind) {
    case TxKind::Kickoff:
        initialized_ = true;
        system_admin_ = tx.sender;
        users_[tx.sender] = UserRecord{tx.sender, Role::SystemAdmin, tx.sender, 0, "system administrator"};
        break;
    case TxKind::AddCoaat: {
        auto& p = std::get<payload::AddCoaat>(checked.body);
        CoaatId id = static_cast<CoaatId>(coaats_.size() + 1);
        coaats_.push_back(Coaat{id, p.coaat_name, p.admin});
        users_[p.admin] = UserRecord{p.admin, Role::CoaatAdmin, tx.sender, id, p.admin_name};
        break;
    }
    case TxKind::AddUser: {
        auto& p = std::get<payload::AddUser>(checked.body);
        users_[p.user] = UserRecord{p.user, p.role, tx.sender, users_.at(tx.sender).coaat_id, p.name};
        break;
    }
    case TxKind::RegisterProperty: {
        auto& p = std::get<payload::RegisterProperty>(checked.body);
        Property property;
        property.cadastral_ref = p.cadastral_ref;
        property.cadastral_data = p.cadastral_data;
        property.registered_by = tx.sender;
        property.contract_id = property_contract_id(p.cadastral_ref);
        properties_.emplace(p.cadastral_ref, std::move(property));
        break;
    }
    case TxKind::CreateDossier: {
        auto& p = std::get<payload::CreateDossier>(checked.body);
        auto& property = properties_.at(p.cadastral_ref);
        if (property.coaat == 0)
            property.coaat = users_.at(tx.sender).coaat_id;
        Dossier d;
        d.id = DossierId{p.cadastral_ref, static_cast<std::uint32_t>(property.dossiers.size() + 1)};
        d.creator = tx.sender;
        d.metadata = p.metadata;
        d.created_at = tx.timestamp;
        property.dossiers.push_back(std::move(d));
        break;
    }
    case TxKind::AddFile: {
        auto& p = std::get<payload::AddFile>(checked.body);
        auto* dossier = mutable_dossier(p.dossier);
        DocumentRecord rec;
        rec.svc = p.svc;
        rec.cid = p.cid;
        rec.version = DocumentVersion::Submitted;
        rec.uploader = tx.sender;
        rec.tx_hash = tx_hash;
        rec.timestamp = tx.timestamp;
        rec.signature = p.signature;
        svc_index_[p.svc] = SvcLocation{dossier->id, dossier->documents.size()};
        dossier->documents.push_back(std::move(rec));
        break;
    }
    case TxKind::RequestValidation: {
        auto& p = std::get<payload::RequestValidation>(checked.body);
        auto* dossier = mutable_dossier(p.dossier);
        dossier->status = DossierStatus::PendingValidation;
        emitted.push_back(emit(EventKind::DossierSubmitted, dossier->id, Role::CoaatAdmin,
                               dossier->status, properties_.at(p.dossier.cadastral_ref).coaat,
                               tx.timestamp));
        break;
    }
    case TxKind::ValidateDossier: {
        auto& p = std::get<payload::ValidateDossier>(checked.body);
        auto* dossier = mutable_dossier(p.dossier);
        std::vector<std::uint32_t> submitted;
        for (std::uint32_t i = 0; i < dossier->documents.size(); ++i)
            if (dossier->documents[i].version == DocumentVersion::Submitted)
                submitted.push_back(i);
        for (std::size_t i = 0; i < p.reviewed.size(); ++i) {
            const auto& r = p.reviewed[i];
            DocumentRecord rec;
            rec.svc = r.svc;
            rec.cid = r.cid;
            rec.version = DocumentVersion::Reviewed;
            rec.uploader = tx.sender;
            rec.tx_hash = tx_hash;
            rec.timestamp = tx.timestamp;
            rec.signature = r.signature;
            rec.reviews = submitted[i];
            svc_index_[r.svc] = SvcLocation{dossier->id, dossier->documents.size()};
            dossier->documents.push_back(std::move(rec));
        }
        dossier->status = p.decision;
        dossier->decided_at = tx.timestamp;
        dossier->decided_by = tx.sender;
        emitted.push_back(emit(EventKind::DossierStatusChanged, dossier->id, Role::CoaatStaff,
                               dossier->status, properties_.at(p.dossier.cadastral_ref).coaat,
                               tx.timestamp));
        break;
    }
    }
    return emitted;
}

Bytes ContractState::snapshot() const
{
    Encoder enc;
    enc.u8(initialized_ ? 1 : 0).fixed(system_admin_.bytes());

    enc.u32(static_cast<std::uint32_t>(users_.size()));
    for (const auto& [addr, u] : users_)
        enc.fixed(addr.bytes())
            .u8(static_cast<std::uint8_t>(u.role))
            .fixed(u.registered_by.bytes())
            .u32(u.coaat_id)
            .str(u.name);

    enc.u32(static_cast<std::uint32_t>(coaats_.size()));
    for (const auto& c : coaats_)
        enc.u32(c.id).str(c.name).fixed(c.admin.bytes());

    enc.u32(static_cast<std::uint32_t>(properties_.size()));
    for (const auto& [ref, p] : properties_) {
        enc.str(ref)
            .str(p.cadastral_data)
            .fixed(p.registered_by.bytes())
            .fixed(p.contract_id.bytes())
            .u32(p.coaat)
            .u32(static_cast<std::uint32_t>(p.dossiers.size()));
        for (const auto& d : p.dossiers) {
            enc.u32(d.id.seq)
                .fixed(d.creator.bytes())
                .u8(static_cast<std::uint8_t>(d.status))
                .str(d.metadata)
                .u64(d.created_at)
                .u64(d.decided_at)
                .fixed(d.decided_by.bytes())
                .u32(static_cast<std::uint32_t>(d.documents.size()));
            for (const auto& doc : d.documents) {
                enc.str(doc.svc.str())
                    .fixed(doc.cid.digest)
                    .u8(static_cast<std::uint8_t>(doc.version))
                    .fixed(doc.uploader.bytes())
                    .fixed(doc.tx_hash)
                    .u64(doc.timestamp)
                    .fixed(doc.signature)
                    .u8(doc.reviews ? 1 : 0)
                    .u32(doc.reviews.value_or(0));
            }
        }
    }

    enc.u32(static_cast<std::uint32_t>(events_.size()));
    for (const auto& e : events_)
        enc.u64(e.id)
            .u8(static_cast<std::uint8_t>(e.kind))
            .str(e.dossier.cadastral_ref)
            .u32(e.dossier.seq)
            .u8(static_cast<std::uint8_t>(e.audience))
            .u8(static_cast<std::uint8_t>(e.status))
            .u32(e.coaat)
            .u64(e.timestamp);
    return enc.take();
}

void ContractState::restore(ByteView snapshot)
{
    auto enum_u8 = [](Decoder& dec, std::uint8_t max) {
        auto v = dec.u8();
        if (v > max)
            throw Error(Errc::MalformedPayload, "enum out of range in snapshot");
        return v;
    };

    Decoder dec(snapshot);
    ContractState next;
    next.initialized_ = enum_u8(dec, 1) == 1;
    next.system_admin_ = Address(dec.array<Address::kSize>());

    for (auto n = dec.u32(); n > 0; --n) {
        UserRecord u;
        u.address = Address(dec.array<Address::kSize>());
        u.role = static_cast<Role>(enum_u8(dec, 3));
        u.registered_by = Address(dec.array<Address::kSize>());
        u.coaat_id = dec.u32();
        u.name = dec.str();
        next.users_[u.address] = std::move(u);
    }
    for (auto n = dec.u32(); n > 0; --n) {
        Coaat c;
        c.id = dec.u32();
        c.name = dec.str();
        c.admin = Address(dec.array<Address::kSize>());
        next.coaats_.push_back(std::move(c));
    }
    for (auto n = dec.u32(); n > 0; --n) {
        Property p;
        p.cadastral_ref = dec.str();
        p.cadastral_data = dec.str();
        p.registered_by = Address(dec.array<Address::kSize>());
        p.contract_id = Address(dec.array<Address::kSize>());
        p.coaat = dec.u32();
        for (auto nd = dec.u32(); nd > 0; --nd) {
            Dossier d;
            d.id = DossierId{p.cadastral_ref, dec.u32()};
            d.creator = Address(dec.array<Address::kSize>());
            d.status = static_cast<DossierStatus>(enum_u8(dec, 3));
            d.metadata = dec.str();
            d.created_at = dec.u64();
            d.decided_at = dec.u64();
            d.decided_by = Address(dec.array<Address::kSize>());
            for (auto ndoc = dec.u32(); ndoc > 0; --ndoc) {
                DocumentRecord doc;
                auto svc = dec.str();
                if (!Svc::checksum_valid(svc))
                    throw Error(Errc::MalformedPayload, "invalid SVC in snapshot");
                doc.svc = Svc::parse(svc);
                doc.cid.digest = dec.array<32>();
                doc.version = static_cast<DocumentVersion>(enum_u8(dec, 1));
                doc.uploader = Address(dec.array<Address::kSize>());
                doc.tx_hash = dec.array<32>();
                doc.timestamp = dec.u64();
                doc.signature = dec.array<32>();
                auto has_reviews = enum_u8(dec, 1);
                auto reviews = dec.u32();
                if (has_reviews)
                    doc.reviews = reviews;
                next.svc_index_[doc.svc] = SvcLocation{d.id, d.documents.size()};
                d.documents.push_back(std::move(doc));
            }
            p.dossiers.push_back(std::move(d));
        }
        auto ref = p.cadastral_ref;
        next.properties_.emplace(std::move(ref), std::move(p));
    }
    for (auto n = dec.u32(); n > 0; --n) {
        Event e;
        e.id = dec.u64();
        e.kind = static_cast<EventKind>(enum_u8(dec, 1));
        e.dossier.cadastral_ref = dec.str();
        e.dossier.seq = dec.u32();
        e.audience = static_cast<Role>(enum_u8(dec, 3));
        e.status = static_cast<DossierStatus>(enum_u8(dec, 3));
        e.coaat = dec.u32();
        e.timestamp = dec.u64();
        next.events_.push_back(std::move(e));
    }
    dec.expect_done();
    *this = std::move(next);
}

}  // namespace coaat
