#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <vector>

#include "coaat/cas.hpp"
#include "coaat/contracts.hpp"
#include "coaat/documents.hpp"
#include "coaat/ledger.hpp"

namespace coaat {

template <class T>
struct Committed {
    T value;
    Receipt receipt;
};

struct DocumentView {
    Bytes body;
    DocumentRecord record;
    DossierId dossier;
    DossierStatus status = DossierStatus::Open;
    std::uint64_t block_height = 0;
};

struct DossierSummary {
    DossierId id;
    DossierStatus status = DossierStatus::Open;
    Address creator;
    std::size_t doc_count = 0;
    // Absent when a Role 2 caller lists another surveyor's dossier.
    std::optional<std::vector<DocumentRecord>> documents;
};

/// The protocol service: every first-level goal as a method taking the
/// caller's address. Off-chain checks (signatures, SVC reservations, blob
/// storage) run here; on-chain checks run inside ContractState when the
/// ledger applies the transaction. Every failure leaves chain and state
/// untouched.
class Engine {
public:
    struct Options {
        FeeSchedule schedule = FeeSchedule::standard();
        Clock clock = system_clock();
        // Persistent when set: chain.bin, snapshots/, blobs/, keys.txt.
        std::optional<std::filesystem::path> data_dir;
        std::shared_ptr<EntropySource> entropy = std::make_shared<SystemEntropy>();
        std::size_t max_blob_size = ContentStore::kDefaultMaxSize;
        std::uint64_t snapshot_interval = 64;
    };

    explicit Engine(Options options);
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    Receipt kickoff(const Address& admin, const SigningKey& admin_key);
    Committed<CoaatId> add_coaat(const Address& caller, const Address& new_admin,
                                 const std::string& coaat_name, const SigningKey& admin_key,
                                 const std::string& admin_name = {});
    Committed<UserRecord> add_user(const Address& caller, const Address& new_user, Role role,
                                   const std::string& name, const SigningKey& user_key);
    Committed<Property> register_property(const Address& caller, const std::string& cadastral_ref,
                                          const std::string& cadastral_data);
    Committed<Dossier> create_dossier(const Address& caller, const std::string& cadastral_ref,
                                      const std::string& metadata);

    // Mints a fresh SVC bound to (dossier, caller, slot). The slot is
    // Submitted for the creator of an Open dossier and Reviewed for an
    // administrator of the owning COAAT on a pending dossier. No fee.
    Svc reserve_svc(const Address& caller, const DossierId& dossier);

    Committed<DocumentRecord> add_document(const Address& caller, const DossierId& dossier,
                                           const SignedDocument& doc);
    Committed<Event> request_validation(const Address& caller, const DossierId& dossier);
    Committed<Dossier> validate_dossier(const Address& caller, const DossierId& dossier,
                                        DossierStatus decision,
                                        const std::vector<SignedDocument>& reviewed);

    // Queries: no transaction, no fee.
    DocumentView view_document(const Address& caller, const Svc& svc) const;
    std::vector<DossierSummary> list_dossiers(const Address& caller,
                                              const std::string& cadastral_ref) const;
    std::vector<Event> events_since(EventId since, std::optional<Role> audience = {}) const;
    // Blocks until an event newer than `since` exists or the timeout passes.
    std::vector<Event> wait_for_events(EventId since, std::optional<Role> audience,
                                       std::chrono::milliseconds timeout) const;

    std::optional<UserRecord> user(const Address& address) const;
    std::optional<Dossier> dossier(const DossierId& id) const;
    std::optional<Property> property(const std::string& cadastral_ref) const;

    const Ledger& ledger() const noexcept { return *ledger_; }
    const ContentStore& store() const noexcept { return store_; }
    const KeyRegistry& keys() const noexcept { return *keys_; }
    const ContractState& unsafe_state() const noexcept { return state_; }
    Hash32 state_root() const { return ledger_->state_root(); }

private:
    struct Reservation {
        DossierId dossier;
        Address holder;
        DocumentVersion slot;
    };

    template <class Payload>
    Transaction make_tx(const Address& caller, TxKind kind, const Payload& p) const;
    Transaction make_tx(const Address& caller, TxKind kind, Bytes payload) const;
    Receipt submit(Transaction tx);
    void check_reservation(const Svc& svc, const DossierId& dossier, const Address& holder,
                           DocumentVersion slot) const;
    void check_signed_by(const SignedDocument& doc, const Address& caller) const;
    void publish_events();

    Options options_;
    ContractState state_;
    ContentStore store_;
    std::unique_ptr<KeyRegistry> keys_;
    std::unique_ptr<Ledger> ledger_;

    mutable std::shared_mutex mutex_;
    std::map<Svc, Reservation> reservations_;

    mutable std::mutex event_mutex_;
    mutable std::condition_variable event_cv_;
    std::atomic<EventId> last_event_{0};
};

}  // namespace coaat
