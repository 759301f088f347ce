#include <ostream>

#include "coaat/cli.hpp"
#include "coaat/client.hpp"
#include "coaat/crypto.hpp"
#include "coaat/service.hpp"

namespace coaat {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kScenarioRef = "9872023VH5797S0001WX";

struct Party {
    std::string label;
    SigningKey key;
    Address address;
};

Party party(const std::string& label)
{
    SigningKey key{sha256("coaat-scenario/" + label)};
    return {label, key, derive_address(key)};
}

class Narrator {
public:
    Narrator(bool json_lines, std::ostream& out) : json_lines_(json_lines), out_(out) {}

    void step(const std::string& who, const std::string& what, const json& receipt = nullptr)
    {
        ++n_;
        if (json_lines_)
            return;
        out_ << "step " << n_ << "  " << who << "  " << what;
        if (!receipt.is_null())
            out_ << "  block " << receipt["block_height"] << "  fee " << receipt["fee_bnb"].get<std::string>()
                 << " BNB";
        out_ << "\n";
    }

private:
    bool json_lines_;
    std::ostream& out_;
    int n_ = 0;
};

std::vector<std::string> kinds_of(const json& chain)
{
    std::vector<std::string> out;
    for (const auto& line : chain)
        out.push_back(line["kind"].get<std::string>());
    return out;
}

std::string join(const std::vector<std::string>& v)
{
    std::string s;
    for (const auto& x : v)
        s += (s.empty() ? "" : ",") + x;
    return s;
}

}  // namespace

int run_scenario(const std::string& name, bool json_lines, std::ostream& out, std::ostream& err)
{
    if (name != "fig2" && name != "fig3") {
        err << "unknown scenario " << name << "\n";
        return exit_code::usage;
    }
    const bool fig3 = name == "fig3";

    Engine::Options opts;
    opts.schedule = FeeSchedule::standard();
    opts.clock = [t = std::uint64_t{1'700'000'000}]() mutable { return t++; };
    opts.entropy = std::make_shared<SeededEntropy>(2023);
    Engine engine(std::move(opts));
    ServiceConfig config;
    config.port = 0;
    Service service(engine, config);
    const auto url = "http://127.0.0.1:" + std::to_string(service.start());

    auto admin = party("role0-system-admin");
    auto coaat_admin = party("role1-coaat-admin");
    auto surveyor = party("role2-surveyor");
    auto reader = party("role3-reader");
    auto login = [&](const Party& p) {
        Client c(url);
        c.login(p.address, p.key);
        return c;
    };

    Narrator say(json_lines, out);
    std::vector<std::string> problems;
    try {
        Client anon(url);
        say.step("Role 0", "deploys the contract factory", anon.kickoff(admin.address, admin.key)["receipt"]);
        auto r0 = login(admin);
        say.step("Role 0", "adds COAAT Albacete and its administrator",
                 r0.add_coaat(coaat_admin.address, "COAAT Albacete", coaat_admin.key, "COAAT administrator")["receipt"]);
        auto r1 = login(coaat_admin);
        say.step("Role 1", "adds a quality surveyor",
                 r1.add_user(surveyor.address, 2, "Quality surveyor", surveyor.key)["receipt"]);

        // Register new property and manage dossier
        auto r2 = login(surveyor);
        say.step("Role 2", std::string("registers property ") + kScenarioRef,
                 r2.register_property(kScenarioRef, "Calle Mayor 1, 02001 Albacete")["receipt"]);
        auto created = r2.create_dossier(kScenarioRef, "Building refurbishment");
        const auto dossier = created["dossier"]["id"].get<std::string>();
        say.step("Role 2", "opens dossier " + dossier, created["receipt"]);
        std::vector<SignedDocument> submitted;
        for (const char* text : {"Project memory: structural refurbishment\n", "Health and safety study\n"}) {
            auto svc = r2.reserve_svc(dossier);
            auto doc = sign(embed_svc(as_bytes(text), svc), surveyor.address, surveyor.key);
            auto added = r2.add_document(dossier, doc);
            say.step("Role 2", "stamps SVC " + svc.str() + ", signs and uploads " + added["document"]["cid"].get<std::string>(),
                     added["receipt"]);
            submitted.push_back(doc);
        }

        if (fig3) {
            say.step("Role 1", "adds a read-only stakeholder",
                     r1.add_user(reader.address, 3, "Notary", reader.key)["receipt"]);

            // Dossier validation
            auto sub = r2.submit(dossier);
            say.step("Role 2", "requests validation", sub["receipt"]);
            auto inbox = r1.events(0, 1, 2000);
            if (inbox["events"].empty())
                problems.push_back("Role 1 received no DossierSubmitted event");
            say.step("Role 1", "is notified: " + (inbox["events"].empty() ? std::string("nothing")
                                                                           : inbox["events"][0]["kind"].get<std::string>()));

            std::vector<SignedDocument> reviewed;
            for (const auto& doc : submitted) {
                auto original = r1.view(doc.embedded_svc.str());
                auto body = strip_svc(original.body);
                auto stamp = to_bytes("Reviewed by COAAT Albacete\n");
                body.insert(body.end(), stamp.begin(), stamp.end());
                auto svc = r1.reserve_svc(dossier);
                reviewed.push_back(sign(embed_svc(body, svc), coaat_admin.address, coaat_admin.key));
            }
            auto decided = r1.decide(dossier, "validated", reviewed);
            say.step("Role 1", "re-stamps, signs and validates the dossier", decided["receipt"]);

            auto staff_inbox = r2.events(0, 2, 2000);
            if (staff_inbox["events"].empty())
                problems.push_back("Role 2 received no DossierStatusChanged event");
            say.step("Role 2", "is notified: " + (staff_inbox["events"].empty()
                                                      ? std::string("nothing")
                                                      : staff_inbox["events"][0]["kind"].get<std::string>()));

            auto r3 = login(reader);
            auto before = engine.ledger().height();
            auto fetched = r3.view(reviewed[0].embedded_svc.str());
            if (fetched.body != reviewed[0].body || engine.ledger().height() != before)
                problems.push_back("read-only lookup changed the chain or returned other bytes");
            say.step("Role 3", "checks SVC " + reviewed[0].embedded_svc.str() + " (no transaction)");
        }
    } catch (const Error& e) {
        err << error_name(e.root()) << ": " << e.detail() << "\n";
        return exit_code::protocol;
    } catch (const TransportError& e) {
        err << "connection error: " << e.what() << "\n";
        return exit_code::connection;
    }

    auto report = Client(url).audit();
    auto events = engine.events_since(0);
    service.stop();

    if (!json_lines)
        out << "chain:\n";
    for (const auto& line : report["chain"])
        out << line.dump() << "\n";
    if (!json_lines)
        out << "events:\n";
    for (const auto& e : events)
        out << json{{"event", e.id},
                    {"kind", std::string(to_string(e.kind))},
                    {"audience", static_cast<int>(e.audience)},
                    {"dossier", e.dossier.to_string()},
                    {"status", std::string(to_string(e.status))}}
                   .dump()
            << "\n";

    std::vector<std::string> expected{"Genesis",  "Kickoff",       "AddCoaat", "AddUser",
                                      "RegisterProperty", "CreateDossier", "AddFile",  "AddFile"};
    std::vector<std::string> expected_events;
    if (fig3) {
        expected.insert(expected.end(), {"AddUser", "RequestValidation", "ValidateDossier"});
        expected_events = {"DossierSubmitted", "DossierStatusChanged"};
    }
    if (kinds_of(report["chain"]) != expected)
        problems.push_back("chain order " + join(kinds_of(report["chain"])) + " differs from " + join(expected));
    std::vector<std::string> seen_events;
    for (const auto& e : events)
        seen_events.emplace_back(to_string(e.kind));
    if (seen_events != expected_events)
        problems.push_back("event order " + join(seen_events) + " differs from " + join(expected_events));
    if (!report["ok"].get<bool>())
        problems.push_back("chain audit failed");

    for (const auto& p : problems)
        err << "scenario " << name << ": " << p << "\n";
    return problems.empty() ? exit_code::ok : exit_code::protocol;
}

}  // namespace coaat
