#include <thread>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "temp_dir.hpp"

using namespace coaat;
using namespace coaat::test;

TEST(Payloads, RoundTripAndRejectTrailingBytes)
{
    payload::ValidateDossier p{DossierId{kRefA, 3}, DossierStatus::Rejected,
                               {{Svc::parse("ABCDEFGHJKMNPQXD"), Cid::of(as_bytes("x")), Hash32{}}}};
    auto bytes = payload::encode(p);
    auto back = payload::decode<payload::ValidateDossier>(bytes);
    EXPECT_EQ(back.dossier, p.dossier);
    EXPECT_EQ(back.decision, p.decision);
    ASSERT_EQ(back.reviewed.size(), 1u);
    EXPECT_EQ(back.reviewed[0].svc, p.reviewed[0].svc);
    bytes.push_back(0);
    EXPECT_EQ(error_of([&] { payload::decode<payload::ValidateDossier>(bytes); }), Errc::MalformedPayload);
}

TEST(Types, DossierIdAndCadastralFormat)
{
    auto id = DossierId::parse(std::string(kRefA) + "-12");
    EXPECT_EQ(id.seq, 12u);
    EXPECT_EQ(id.to_string(), std::string(kRefA) + "-12");
    EXPECT_TRUE(cadastral_ref_valid(kRefA));
    EXPECT_FALSE(cadastral_ref_valid("9872023VH5797S0001W"));
    EXPECT_FALSE(cadastral_ref_valid("9872023vh5797S0001WX"));
    EXPECT_FALSE(cadastral_ref_valid("9872023VH5797S0001WXY"));
}

TEST(Kickoff, OnceOnly)
{
    Engine engine(test_options());
    auto admin = make_actor("admin");
    auto r = engine.kickoff(admin.address, admin.key);
    EXPECT_EQ(r.fee_bnb.to_string(), "0.05250531");
    EXPECT_EQ(engine.user(admin.address)->role, Role::SystemAdmin);
    EXPECT_EQ(error_of([&] { engine.kickoff(admin.address, admin.key); }), Errc::AlreadyInitialized);
    auto other = make_actor("x");
    EXPECT_EQ(error_of([&] { engine.kickoff(other.address, other.key); }), Errc::AlreadyInitialized);
}

TEST(Kickoff, RequiredBeforeAnythingElse)
{
    Engine engine(test_options());
    auto a = make_actor("a"), b = make_actor("b");
    EXPECT_EQ(error_of([&] { engine.add_coaat(a.address, b.address, "X", b.key); }), Errc::NotInitialized);
    EXPECT_EQ(engine.ledger().height(), 0u);
}

TEST(Registrars, AddCoaatAndUserRules)
{
    World w;
    auto fresh = make_actor("fresh");
    EXPECT_EQ(error_of([&] { w.engine.add_coaat(w.coaat_admin.address, fresh.address, "X", fresh.key); }),
              Errc::Unauthorized);
    EXPECT_EQ(error_of([&] { w.engine.add_coaat(w.admin.address, w.staff.address, "X", w.staff.key); }),
              Errc::AddressAlreadyRegistered);
    EXPECT_EQ(error_of([&] { w.engine.add_user(w.staff.address, fresh.address, Role::CoaatStaff, "n", fresh.key); }),
              Errc::Unauthorized);
    EXPECT_EQ(error_of([&] { w.engine.add_user(w.coaat_admin.address, fresh.address, Role::CoaatAdmin, "n", fresh.key); }),
              Errc::InvalidRole);
    EXPECT_EQ(error_of([&] { w.engine.add_user(w.coaat_admin.address, fresh.address, Role::SystemAdmin, "n", fresh.key); }),
              Errc::InvalidRole);
    EXPECT_EQ(error_of([&] { w.engine.add_user(w.admin.address, fresh.address, Role::CoaatStaff, "n", fresh.key); }),
              Errc::Unauthorized);

    auto added = w.engine.add_user(w.coaat_admin.address, fresh.address, Role::CoaatStaff, "Fresh", fresh.key);
    EXPECT_EQ(added.receipt.fee_bnb.to_string(), "0.00177261");
    EXPECT_EQ(added.value.coaat_id, w.engine.user(w.coaat_admin.address)->coaat_id);
    EXPECT_EQ(added.value.registered_by, w.coaat_admin.address);
    EXPECT_TRUE(w.engine.keys().find(fresh.address));
}

TEST(Properties, RegisterAndDuplicate)
{
    World w;
    auto r = w.engine.register_property(w.staff.address, kRefA, "Calle Mayor 1");
    EXPECT_EQ(r.receipt.fee_bnb.to_string(), "0.03027519");
    EXPECT_FALSE(r.value.contract_id.is_zero());
    EXPECT_EQ(error_of([&] { w.engine.register_property(w.other_staff.address, kRefA, "again"); }),
              Errc::DuplicateProperty);
    EXPECT_EQ(error_of([&] { w.engine.register_property(w.staff.address, "9872023VH5797S0001W", "x"); }),
              Errc::MalformedCadastralRef);
    EXPECT_EQ(error_of([&] { w.engine.register_property(w.reader.address, kRefB, "x"); }), Errc::Unauthorized);
    EXPECT_EQ(error_of([&] { w.engine.register_property(w.admin.address, kRefB, "x"); }), Errc::Unauthorized);
    EXPECT_NO_THROW(w.engine.register_property(w.coaat_admin.address, kRefB, "x"));
}

TEST(Dossiers, OneOpenAtATime)
{
    World w;
    auto id = w.open_dossier_with_docs(1);
    EXPECT_EQ(id.seq, 1u);
    EXPECT_EQ(error_of([&] { w.engine.create_dossier(w.staff.address, kRefA, "second"); }),
              Errc::DossierAlreadyOpen);
    w.engine.request_validation(w.staff.address, id);
    EXPECT_EQ(error_of([&] { w.engine.create_dossier(w.staff.address, kRefA, "second"); }),
              Errc::DossierAlreadyOpen);
    auto reviewed = review_document(w.engine, w.coaat_admin, id,
                                    w.engine.store().get(w.engine.dossier(id)->documents[0].cid), "ok");
    w.engine.validate_dossier(w.coaat_admin.address, id, DossierStatus::Validated, {reviewed});
    auto next = w.engine.create_dossier(w.staff2.address, kRefA, "second");
    EXPECT_EQ(next.value.id.seq, 2u);
    EXPECT_EQ(next.receipt.fee_bnb.to_string(), "0.00409118");
}

TEST(Dossiers, PropertyBindsToFirstCreatorsCoaat)
{
    World w;
    w.engine.register_property(w.other_staff.address, kRefB, "Cuenca");
    auto first = w.engine.create_dossier(w.staff.address, kRefB, "m").value.id;
    EXPECT_EQ(w.engine.property(kRefB)->coaat, w.engine.user(w.staff.address)->coaat_id);
    w.engine.add_document(w.staff.address, first, make_document(w.engine, w.staff, first, "doc"));
    w.engine.request_validation(w.staff.address, first);
    EXPECT_EQ(error_of([&] { w.engine.validate_dossier(w.other_admin.address, first, DossierStatus::Rejected, {}); }),
              Errc::Unauthorized);
    auto original = w.engine.store().get(w.engine.dossier(first)->documents[0].cid);
    auto reviewed = review_document(w.engine, w.coaat_admin, first, original, "no");
    EXPECT_NO_THROW(w.engine.validate_dossier(w.coaat_admin.address, first, DossierStatus::Rejected, {reviewed}));
}

TEST(Documents, AddRules)
{
    World w;
    auto id = w.open_dossier_with_docs(0);
    auto doc = make_document(w.engine, w.staff, id, "plan A");
    auto rec = w.engine.add_document(w.staff.address, id, doc);
    EXPECT_EQ(rec.receipt.fee_bnb.to_string(), "0.00304687");
    EXPECT_EQ(rec.value.cid, Cid::of(doc.body));
    EXPECT_EQ(rec.value.version, DocumentVersion::Submitted);

    // reusing a consumed SVC
    auto replayed = sign(doc.body, w.staff.address, w.staff.key);
    EXPECT_EQ(error_of([&] { w.engine.add_document(w.staff.address, id, replayed); }), Errc::SvcMismatch);

    // another surveyor cannot add to this dossier
    EXPECT_EQ(error_of([&] { w.engine.reserve_svc(w.staff2.address, id); }), Errc::Unauthorized);
    auto foreign = make_document(w.engine, w.staff, id, "plan B");
    auto resigned = sign(foreign.body, w.staff2.address, w.staff2.key);
    EXPECT_EQ(error_of([&] { w.engine.add_document(w.staff2.address, id, resigned); }), Errc::Unauthorized);

    // signed by someone other than the caller
    EXPECT_EQ(error_of([&] { w.engine.add_document(w.staff.address, id, resigned); }), Errc::SignatureInvalid);

    // SVC minted by hand, never reserved
    auto forged = sign(embed_svc(as_bytes("plan C"), Svc::parse("7K3M9QX2TBW4REPN")), w.staff.address, w.staff.key);
    EXPECT_EQ(error_of([&] { w.engine.add_document(w.staff.address, id, forged); }), Errc::SvcMismatch);

    // tampered body after signing
    auto tampered = foreign;
    tampered.body[0] ^= 1;
    EXPECT_EQ(error_of([&] { w.engine.add_document(w.staff.address, id, tampered); }), Errc::SignatureInvalid);

    auto height = w.engine.ledger().height();
    EXPECT_NO_THROW(w.engine.add_document(w.staff.address, id, foreign));
    EXPECT_EQ(w.engine.ledger().height(), height + 1);
}

TEST(Documents, SvcFromAnotherDossierMismatches)
{
    World w;
    auto a = w.open_dossier_with_docs(0);
    w.engine.register_property(w.staff2.address, kRefB, "b");
    auto b = w.engine.create_dossier(w.staff2.address, kRefB, "m").value.id;
    auto svc_b = w.engine.reserve_svc(w.staff2.address, b);
    (void)svc_b;
    auto doc = make_document(w.engine, w.staff, a, "for a");
    auto moved = sign(doc.body, w.staff2.address, w.staff2.key);
    EXPECT_EQ(error_of([&] { w.engine.add_document(w.staff2.address, b, moved); }), Errc::SvcMismatch);
}

TEST(Validation, RequestRules)
{
    World w;
    auto id = w.open_dossier_with_docs(0);
    EXPECT_EQ(error_of([&] { w.engine.request_validation(w.staff.address, id); }), Errc::EmptyDossier);
    w.engine.add_document(w.staff.address, id, make_document(w.engine, w.staff, id, "x"));
    EXPECT_EQ(error_of([&] { w.engine.request_validation(w.staff2.address, id); }), Errc::Unauthorized);
    auto ev = w.engine.request_validation(w.staff.address, id);
    EXPECT_EQ(ev.value.kind, EventKind::DossierSubmitted);
    EXPECT_EQ(ev.value.audience, Role::CoaatAdmin);
    EXPECT_EQ(ev.receipt.fee_bnb, Decimal{});
    EXPECT_EQ(error_of([&] { w.engine.request_validation(w.staff.address, id); }), Errc::WrongStatus);
    EXPECT_EQ(error_of([&] { w.engine.reserve_svc(w.staff.address, id); }), Errc::WrongStatus);
    EXPECT_EQ(error_of([&] { w.engine.add_document(w.staff.address, id, make_document(w.engine, w.staff, id, "late")); }),
              Errc::WrongStatus);
}

TEST(Validation, DecisionFlow)
{
    World w;
    auto id = w.open_dossier_with_docs(2);
    w.engine.request_validation(w.staff.address, id);
    auto d = *w.engine.dossier(id);
    auto r0 = review_document(w.engine, w.coaat_admin, id, w.engine.store().get(d.documents[0].cid), "seen");
    auto r1 = review_document(w.engine, w.coaat_admin, id, w.engine.store().get(d.documents[1].cid), "seen");

    EXPECT_EQ(error_of([&] { w.engine.validate_dossier(w.staff.address, id, DossierStatus::Validated, {r0, r1}); }),
              Errc::Unauthorized);
    EXPECT_EQ(error_of([&] { w.engine.validate_dossier(w.coaat_admin.address, id, DossierStatus::Validated, {r0}); }),
              Errc::ReviewCountMismatch);
    EXPECT_EQ(error_of([&] { w.engine.validate_dossier(w.coaat_admin.address, id, DossierStatus::Validated, {r0, r0}); }),
              Errc::SvcMismatch);
    EXPECT_EQ(error_of([&] { w.engine.validate_dossier(w.coaat_admin.address, id, DossierStatus::Open, {r0, r1}); }),
              Errc::MalformedPayload);
    auto bad = r1;
    bad.signature[0] ^= 1;
    EXPECT_EQ(error_of([&] { w.engine.validate_dossier(w.coaat_admin.address, id, DossierStatus::Validated, {r0, bad}); }),
              Errc::SignatureInvalid);

    auto height = w.engine.ledger().height();
    auto done = w.engine.validate_dossier(w.coaat_admin.address, id, DossierStatus::Validated, {r0, r1});
    EXPECT_EQ(w.engine.ledger().height(), height + 1);
    EXPECT_EQ(done.value.status, DossierStatus::Validated);
    EXPECT_EQ(done.value.decided_by, w.coaat_admin.address);
    ASSERT_EQ(done.value.documents.size(), 4u);
    EXPECT_EQ(done.value.documents[2].version, DocumentVersion::Reviewed);
    EXPECT_EQ(done.value.documents[2].reviews, 0u);
    EXPECT_EQ(done.value.documents[3].reviews, 1u);
    EXPECT_EQ(done.receipt.emitted_events.size(), 1u);

    auto events = w.engine.events_since(0);
    ASSERT_EQ(events.size(), 2u);
    EXPECT_EQ(events[1].kind, EventKind::DossierStatusChanged);
    EXPECT_EQ(events[1].audience, Role::CoaatStaff);
    EXPECT_EQ(events[1].status, DossierStatus::Validated);

    EXPECT_EQ(error_of([&] { w.engine.validate_dossier(w.coaat_admin.address, id, DossierStatus::Rejected, {}); }),
              Errc::WrongStatus);
}

TEST(Validation, RejectedFreesProperty)
{
    World w;
    auto id = w.open_dossier_with_docs(1);
    EXPECT_EQ(w.decide(id, DossierStatus::Rejected).status, DossierStatus::Rejected);
    EXPECT_NO_THROW(w.engine.create_dossier(w.staff.address, kRefA, "resubmission"));
}

TEST(View, PolicyByRoleAndStatus)
{
    World w;
    auto id = w.open_dossier_with_docs(1);
    auto svc = w.engine.dossier(id)->documents[0].svc;

    EXPECT_NO_THROW(w.engine.view_document(w.staff.address, svc));
    EXPECT_NO_THROW(w.engine.view_document(w.coaat_admin.address, svc));
    EXPECT_EQ(error_of([&] { w.engine.view_document(w.reader.address, svc); }), Errc::NotYetValidated);
    EXPECT_EQ(error_of([&] { w.engine.view_document(w.staff2.address, svc); }), Errc::Unauthorized);
    EXPECT_EQ(error_of([&] { w.engine.view_document(w.other_admin.address, svc); }), Errc::Unauthorized);
    EXPECT_EQ(error_of([&] { w.engine.view_document(w.stranger.address, svc); }), Errc::Unauthorized);
    EXPECT_EQ(error_of([&] { w.engine.view_document(w.reader.address, Svc::parse("7K3M9QX2TBW4REPN")); }),
              Errc::UnknownSvc);

    w.decide(id, DossierStatus::Validated);
    auto height = w.engine.ledger().height();
    auto view = w.engine.view_document(w.reader.address, svc);
    EXPECT_EQ(view.status, DossierStatus::Validated);
    EXPECT_EQ(Cid::of(view.body), view.record.cid);
    EXPECT_GT(view.block_height, 0u);
    EXPECT_EQ(w.engine.ledger().height(), height);

    auto reviewed_svc = w.engine.dossier(id)->documents[1].svc;
    EXPECT_NO_THROW(w.engine.view_document(w.reader.address, reviewed_svc));
}

TEST(View, RejectedStaysHiddenFromReaders)
{
    World w;
    auto id = w.open_dossier_with_docs(1);
    w.decide(id, DossierStatus::Rejected);
    auto svc = w.engine.dossier(id)->documents[0].svc;
    EXPECT_EQ(error_of([&] { w.engine.view_document(w.reader.address, svc); }), Errc::NotYetValidated);
}

TEST(List, ExistenceWithoutContents)
{
    World w;
    auto id = w.open_dossier_with_docs(2);
    auto mine = w.engine.list_dossiers(w.staff.address, kRefA);
    ASSERT_EQ(mine.size(), 1u);
    EXPECT_TRUE(mine[0].documents);
    auto theirs = w.engine.list_dossiers(w.staff2.address, kRefA);
    ASSERT_EQ(theirs.size(), 1u);
    EXPECT_EQ(theirs[0].id, id);
    EXPECT_EQ(theirs[0].doc_count, 2u);
    EXPECT_FALSE(theirs[0].documents);
    EXPECT_TRUE(w.engine.list_dossiers(w.coaat_admin.address, kRefA)[0].documents);
    EXPECT_EQ(error_of([&] { w.engine.list_dossiers(w.reader.address, kRefA); }), Errc::Unauthorized);
    EXPECT_EQ(error_of([&] { w.engine.list_dossiers(w.staff.address, kRefB); }), Errc::UnknownProperty);
}

TEST(Traceability, RecordsResolveToTheirTransactions)
{
    World w;
    auto id = w.open_dossier_with_docs(3);
    w.decide(id, DossierStatus::Validated);
    auto dossier = *w.engine.dossier(id);
    for (const auto& rec : dossier.documents) {
        auto at = w.engine.ledger().find_tx(rec.tx_hash);
        ASSERT_TRUE(at);
        if (rec.version == DocumentVersion::Submitted) {
            auto p = payload::decode<payload::AddFile>(at->tx.payload);
            EXPECT_EQ(p.svc, rec.svc);
            EXPECT_EQ(p.cid, rec.cid);
        } else {
            auto p = payload::decode<payload::ValidateDossier>(at->tx.payload);
            bool found = false;
            for (const auto& r : p.reviewed)
                found |= r.svc == rec.svc && r.cid == rec.cid;
            EXPECT_TRUE(found);
        }
    }
}

TEST(Events, WaitWakesOnNewEvent)
{
    World w;
    auto id = w.open_dossier_with_docs(1);
    std::vector<Event> got;
    std::thread waiter([&] { got = w.engine.wait_for_events(0, Role::CoaatAdmin, std::chrono::seconds(5)); });
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    w.engine.request_validation(w.staff.address, id);
    waiter.join();
    ASSERT_EQ(got.size(), 1u);
    EXPECT_EQ(got[0].id, 1u);
    EXPECT_TRUE(w.engine.wait_for_events(1, Role::CoaatAdmin, std::chrono::milliseconds(20)).empty());
}

TEST(Persistence, EngineReopensWithSameState)
{
    TempDir tmp;
    Hash32 root;
    Svc svc;
    {
        auto opts = test_options();
        opts.data_dir = tmp.path;
        opts.snapshot_interval = 5;
        World w(opts);
        auto id = w.open_dossier_with_docs(2);
        w.decide(id, DossierStatus::Validated);
        root = w.engine.state_root();
        svc = w.engine.dossier(id)->documents[0].svc;
    }
    auto opts = test_options();
    opts.data_dir = tmp.path;
    Engine engine(opts);
    EXPECT_EQ(engine.state_root(), root);
    auto reader = make_actor("notary");
    EXPECT_EQ(to_string(strip_svc(engine.view_document(reader.address, svc).body)), "project memory 0\n");
    EXPECT_TRUE(engine.keys().find(make_actor("surveyor-1").address));
}

TEST(Replay, EngineLogReplaysToSameRoot)
{
    World w;
    auto id = w.open_dossier_with_docs(2);
    w.decide(id, DossierStatus::Rejected);
    ContractState fresh;
    EXPECT_EQ(Ledger::replay(w.engine.ledger().tx_log(), w.engine.ledger().schedule(), fresh), w.engine.state_root());
}
