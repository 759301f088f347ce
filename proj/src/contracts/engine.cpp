#include <set>

#include "coaat/engine.hpp"

namespace coaat {

namespace {

ContentStore open_store(const Engine::Options& options)
{
    if (options.data_dir)
        return ContentStore::at_directory(*options.data_dir / "blobs", options.max_blob_size);
    return ContentStore::in_memory(options.max_blob_size);
}

std::unique_ptr<KeyRegistry> open_keys(const Engine::Options& options)
{
    if (options.data_dir) {
        std::filesystem::create_directories(*options.data_dir);
        return std::make_unique<KeyRegistry>(*options.data_dir / "keys.txt");
    }
    return std::make_unique<KeyRegistry>();
}

}  // namespace

Engine::Engine(Options options)
    : options_(std::move(options)), store_(open_store(options_)), keys_(open_keys(options_))
{
    Ledger::Options lo;
    lo.schedule = options_.schedule;
    lo.clock = options_.clock;
    lo.data_dir = options_.data_dir;
    lo.snapshot_interval = options_.snapshot_interval;
    ledger_ = std::make_unique<Ledger>(state_, std::move(lo));
    last_event_ = state_.events().size();
}

template <class Payload>
Transaction Engine::make_tx(const Address& caller, TxKind kind, const Payload& p) const
{
    return make_tx(caller, kind, payload::encode(p));
}

Transaction Engine::make_tx(const Address& caller, TxKind kind, Bytes payload) const
{
    Transaction tx;
    tx.kind = kind;
    tx.sender = caller;
    tx.payload = std::move(payload);
    tx.nonce = ledger_->next_nonce(caller);
    return tx;
}

Receipt Engine::submit(Transaction tx)
{
    try {
        auto receipt = ledger_->submit_transaction(std::move(tx));
        publish_events();
        return receipt;
    } catch (const Error& e) {
        if (e.code() == Errc::RejectedByContract && e.inner())
            throw Error(*e.inner(), e.detail());
        throw;
    }
}

void Engine::publish_events()
{
    {
        std::lock_guard lock(event_mutex_);
        last_event_ = state_.events().size();
    }
    event_cv_.notify_all();
}

Receipt Engine::kickoff(const Address& admin, const SigningKey& admin_key)
{
    std::unique_lock lock(mutex_);
    auto tx = make_tx(admin, TxKind::Kickoff, Bytes{});
    state_.validate(tx);
    if (keys_->find(admin))
        throw Error(Errc::AddressAlreadyRegistered, admin.to_string());
    auto receipt = submit(std::move(tx));
    keys_->register_key(admin, admin_key);
    return receipt;
}

Committed<CoaatId> Engine::add_coaat(const Address& caller, const Address& new_admin,
                                     const std::string& coaat_name, const SigningKey& admin_key,
                                     const std::string& admin_name)
{
    std::unique_lock lock(mutex_);
    auto tx = make_tx(caller, TxKind::AddCoaat, payload::AddCoaat{new_admin, coaat_name, admin_name});
    state_.validate(tx);
    if (keys_->find(new_admin))
        throw Error(Errc::AddressAlreadyRegistered, new_admin.to_string());
    auto receipt = submit(std::move(tx));
    keys_->register_key(new_admin, admin_key);
    return {state_.find_user(new_admin)->coaat_id, std::move(receipt)};
}

Committed<UserRecord> Engine::add_user(const Address& caller, const Address& new_user, Role role,
                                       const std::string& name, const SigningKey& user_key)
{
    std::unique_lock lock(mutex_);
    auto tx = make_tx(caller, TxKind::AddUser, payload::AddUser{new_user, role, name});
    state_.validate(tx);
    if (keys_->find(new_user))
        throw Error(Errc::AddressAlreadyRegistered, new_user.to_string());
    auto receipt = submit(std::move(tx));
    keys_->register_key(new_user, user_key);
    return {*state_.find_user(new_user), std::move(receipt)};
}

Committed<Property> Engine::register_property(const Address& caller, const std::string& cadastral_ref,
                                              const std::string& cadastral_data)
{
    std::unique_lock lock(mutex_);
    auto receipt = submit(make_tx(caller, TxKind::RegisterProperty,
                                  payload::RegisterProperty{cadastral_ref, cadastral_data}));
    return {*state_.find_property(cadastral_ref), std::move(receipt)};
}

Committed<Dossier> Engine::create_dossier(const Address& caller, const std::string& cadastral_ref,
                                          const std::string& metadata)
{
    std::unique_lock lock(mutex_);
    auto receipt = submit(
        make_tx(caller, TxKind::CreateDossier, payload::CreateDossier{cadastral_ref, metadata}));
    return {state_.find_property(cadastral_ref)->dossiers.back(), std::move(receipt)};
}

Svc Engine::reserve_svc(const Address& caller, const DossierId& id)
{
    std::unique_lock lock(mutex_);
    const auto* user = state_.find_user(caller);
    if (user == nullptr)
        throw Error(Errc::Unauthorized, caller.to_string() + " is not registered");
    const auto* dossier = state_.find_dossier(id);
    if (dossier == nullptr)
        throw Error(Errc::UnknownDossier, id.to_string());
    const auto* property = state_.find_property(id.cadastral_ref);

    const bool creator = dossier->creator == caller;
    const bool reviewer = user->role == Role::CoaatAdmin && property->coaat == user->coaat_id;
    if (!creator && !reviewer)
        throw Error(Errc::Unauthorized, "no standing on " + id.to_string());

    DocumentVersion slot;
    if (creator && dossier->status == DossierStatus::Open)
        slot = DocumentVersion::Submitted;
    else if (reviewer && dossier->status == DossierStatus::PendingValidation)
        slot = DocumentVersion::Reviewed;
    else
        throw Error(Errc::WrongStatus, std::string(to_string(dossier->status)));

    for (;;) {
        auto svc = generate_svc(*options_.entropy);
        if (state_.find_svc(svc) || reservations_.contains(svc))
            continue;
        reservations_.emplace(svc, Reservation{id, caller, slot});
        return svc;
    }
}

void Engine::check_reservation(const Svc& svc, const DossierId& dossier, const Address& holder,
                               DocumentVersion slot) const
{
    auto it = reservations_.find(svc);
    if (it == reservations_.end() || it->second.dossier != dossier || it->second.holder != holder ||
        it->second.slot != slot)
        throw Error(Errc::SvcMismatch, "SVC " + svc.str() + " was not issued for this " +
                                           std::string(to_string(slot)) + " slot of " +
                                           dossier.to_string());
}

void Engine::check_signed_by(const SignedDocument& doc, const Address& caller) const
{
    if (doc.signer != caller)
        throw Error(Errc::SignatureInvalid, "document signed by " + doc.signer.to_string());
    try {
        verify(doc, *keys_);
    } catch (const Error& e) {
        if (e.code() == Errc::UnknownSigner)
            throw Error(Errc::SignatureInvalid, e.what());
        throw;
    }
}

Committed<DocumentRecord> Engine::add_document(const Address& caller, const DossierId& id,
                                               const SignedDocument& doc)
{
    std::unique_lock lock(mutex_);
    payload::AddFile p{id, doc.embedded_svc, Cid::of(doc.body), doc.signature};
    auto tx = make_tx(caller, TxKind::AddFile, p);
    state_.validate(tx);
    check_signed_by(doc, caller);
    check_reservation(doc.embedded_svc, id, caller, DocumentVersion::Submitted);
    store_.put(doc.body);
    auto receipt = submit(std::move(tx));
    reservations_.erase(doc.embedded_svc);
    return {state_.find_dossier(id)->documents.back(), std::move(receipt)};
}

Committed<Event> Engine::request_validation(const Address& caller, const DossierId& id)
{
    std::unique_lock lock(mutex_);
    auto receipt = submit(make_tx(caller, TxKind::RequestValidation, payload::RequestValidation{id}));
    return {state_.events().back(), std::move(receipt)};
}

Committed<Dossier> Engine::validate_dossier(const Address& caller, const DossierId& id,
                                            DossierStatus decision,
                                            const std::vector<SignedDocument>& reviewed)
{
    std::unique_lock lock(mutex_);
    payload::ValidateDossier p{id, decision, {}};
    for (const auto& doc : reviewed)
        p.reviewed.push_back({doc.embedded_svc, Cid::of(doc.body), doc.signature});
    auto tx = make_tx(caller, TxKind::ValidateDossier, p);
    state_.validate(tx);
    for (const auto& doc : reviewed) {
        check_signed_by(doc, caller);
        check_reservation(doc.embedded_svc, id, caller, DocumentVersion::Reviewed);
    }
    for (const auto& doc : reviewed)
        store_.put(doc.body);
    auto receipt = submit(std::move(tx));
    for (const auto& doc : reviewed)
        reservations_.erase(doc.embedded_svc);
    return {*state_.find_dossier(id), std::move(receipt)};
}

DocumentView Engine::view_document(const Address& caller, const Svc& svc) const
{
    std::shared_lock lock(mutex_);
    const auto* user = state_.find_user(caller);
    if (user == nullptr)
        throw Error(Errc::Unauthorized, caller.to_string() + " is not registered");
    auto loc = state_.find_svc(svc);
    if (!loc)
        throw Error(Errc::UnknownSvc, svc.str());
    const auto* dossier = state_.find_dossier(loc->dossier);
    const auto* property = state_.find_property(loc->dossier.cadastral_ref);

    const bool own_dossier = user->role == Role::CoaatStaff && dossier->creator == caller;
    const bool owning_admin = user->role == Role::CoaatAdmin && property->coaat == user->coaat_id;
    if (!own_dossier && !owning_admin && dossier->status != DossierStatus::Validated) {
        if (user->role == Role::ReadOnly)
            throw Error(Errc::NotYetValidated, loc->dossier.to_string());
        throw Error(Errc::Unauthorized, "no access to " + loc->dossier.to_string());
    }

    DocumentView view;
    view.record = dossier->documents.at(loc->index);
    view.dossier = dossier->id;
    view.status = dossier->status;
    view.body = store_.get(view.record.cid);
    if (auto at = ledger_->find_tx(view.record.tx_hash))
        view.block_height = at->height;
    return view;
}

std::vector<DossierSummary> Engine::list_dossiers(const Address& caller,
                                                  const std::string& cadastral_ref) const
{
    std::shared_lock lock(mutex_);
    const auto* user = state_.find_user(caller);
    if (user == nullptr || (user->role != Role::CoaatAdmin && user->role != Role::CoaatStaff))
        throw Error(Errc::Unauthorized, "listing dossiers needs Role 1 or 2");
    const auto* property = state_.find_property(cadastral_ref);
    if (property == nullptr)
        throw Error(Errc::UnknownProperty, cadastral_ref);

    std::vector<DossierSummary> out;
    for (const auto& d : property->dossiers) {
        DossierSummary s{d.id, d.status, d.creator, d.documents.size(), std::nullopt};
        if (user->role == Role::CoaatAdmin || d.creator == caller)
            s.documents = d.documents;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Event> Engine::events_since(EventId since, std::optional<Role> audience) const
{
    std::shared_lock lock(mutex_);
    std::vector<Event> out;
    const auto& events = state_.events();
    for (auto i = static_cast<std::size_t>(std::min<EventId>(since, events.size())); i < events.size(); ++i)
        if (!audience || events[i].audience == *audience)
            out.push_back(events[i]);
    return out;
}

std::vector<Event> Engine::wait_for_events(EventId since, std::optional<Role> audience,
                                           std::chrono::milliseconds timeout) const
{
    auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        auto seen = last_event_.load();
        auto events = events_since(since, audience);
        if (!events.empty())
            return events;
        std::unique_lock lock(event_mutex_);
        if (!event_cv_.wait_until(lock, deadline, [&] { return last_event_.load() != seen; }))
            return {};
    }
}

std::optional<UserRecord> Engine::user(const Address& address) const
{
    std::shared_lock lock(mutex_);
    if (const auto* u = state_.find_user(address))
        return *u;
    return std::nullopt;
}

std::optional<Dossier> Engine::dossier(const DossierId& id) const
{
    std::shared_lock lock(mutex_);
    if (const auto* d = state_.find_dossier(id))
        return *d;
    return std::nullopt;
}

std::optional<Property> Engine::property(const std::string& cadastral_ref) const
{
    std::shared_lock lock(mutex_);
    if (const auto* p = state_.find_property(cadastral_ref))
        return *p;
    return std::nullopt;
}

}  // namespace coaat
