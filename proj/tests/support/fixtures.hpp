#pragma once

#include <atomic>
#include <memory>
#include <string>

#include "coaat/crypto.hpp"
#include "coaat/engine.hpp"

namespace coaat::test {

struct Actor {
    std::string name;
    SigningKey key;
    Address address;
};

inline Actor make_actor(const std::string& name)
{
    SigningKey key{sha256("test-actor/" + name)};
    return Actor{name, key, derive_address(key)};
}

// Starts at a fixed epoch and ticks one second per reading.
inline Clock counter_clock(std::uint64_t start = 1'700'000'000)
{
    auto now = std::make_shared<std::atomic<std::uint64_t>>(start);
    return [now] { return now->fetch_add(1); };
}

inline Engine::Options test_options(std::uint64_t seed = 7)
{
    Engine::Options o;
    o.schedule = FeeSchedule::standard();
    o.clock = counter_clock();
    o.entropy = std::make_shared<SeededEntropy>(seed);
    return o;
}

inline SignedDocument make_document(Engine& engine, const Actor& signer, const DossierId& dossier,
                                    const std::string& content)
{
    auto svc = engine.reserve_svc(signer.address, dossier);
    return sign(embed_svc(as_bytes(content), svc), signer.address, signer.key);
}

inline SignedDocument review_document(Engine& engine, const Actor& reviewer, const DossierId& dossier,
                                      ByteView original, const std::string& note)
{
    auto svc = engine.reserve_svc(reviewer.address, dossier);
    auto body = strip_svc(original);
    auto stamp = to_bytes(note + "\n");
    body.insert(body.end(), stamp.begin(), stamp.end());
    return sign(embed_svc(body, svc), reviewer.address, reviewer.key);
}

inline constexpr const char* kRefA = "9872023VH5797S0001WX";
inline constexpr const char* kRefB = "0847106VK4704F0001PI";

/// Kickoff, one COAAT with an administrator, two surveyors, one reader and a
/// second COAAT for cross-COAAT checks.
struct World {
    Engine engine;
    Actor admin = make_actor("admin");
    Actor coaat_admin = make_actor("coaat-albacete");
    Actor other_admin = make_actor("coaat-cuenca");
    Actor staff = make_actor("surveyor-1");
    Actor staff2 = make_actor("surveyor-2");
    Actor other_staff = make_actor("surveyor-cuenca");
    Actor reader = make_actor("notary");
    Actor stranger = make_actor("stranger");

    explicit World(Engine::Options options = test_options()) : engine(std::move(options))
    {
        engine.kickoff(admin.address, admin.key);
        engine.add_coaat(admin.address, coaat_admin.address, "COAAT Albacete", coaat_admin.key, "Albacete admin");
        engine.add_coaat(admin.address, other_admin.address, "COAAT Cuenca", other_admin.key, "Cuenca admin");
        engine.add_user(coaat_admin.address, staff.address, Role::CoaatStaff, "Surveyor One", staff.key);
        engine.add_user(coaat_admin.address, staff2.address, Role::CoaatStaff, "Surveyor Two", staff2.key);
        engine.add_user(other_admin.address, other_staff.address, Role::CoaatStaff, "Cuenca Surveyor", other_staff.key);
        engine.add_user(coaat_admin.address, reader.address, Role::ReadOnly, "Notary", reader.key);
    }

    // Registers kRefA, opens a dossier as `staff` and adds `docs` documents.
    DossierId open_dossier_with_docs(int docs)
    {
        if (!engine.property(kRefA))
            engine.register_property(staff.address, kRefA, "Calle Mayor 1, Albacete");
        auto dossier = engine.create_dossier(staff.address, kRefA, "refurbishment").value.id;
        for (int i = 0; i < docs; ++i)
            engine.add_document(staff.address, dossier,
                                make_document(engine, staff, dossier, "project memory " + std::to_string(i)));
        return dossier;
    }

    // Drives a dossier to a decision with freshly reviewed copies of every file.
    Dossier decide(const DossierId& id, DossierStatus decision)
    {
        engine.request_validation(staff.address, id);
        auto d = *engine.dossier(id);
        std::vector<SignedDocument> reviewed;
        for (const auto& rec : d.documents)
            reviewed.push_back(review_document(engine, coaat_admin, id, engine.store().get(rec.cid), "reviewed"));
        return engine.validate_dossier(coaat_admin.address, id, decision, reviewed).value;
    }
};

template <class F>
Errc error_of(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    throw std::logic_error("expected a coaat::Error");
}

}  // namespace coaat::test
