// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "coaat/cli.hpp"
#include "coaat/client.hpp"
#include "coaat/service.hpp"
#include "fixtures.hpp"
#include "random_session.hpp"
#include "temp_dir.hpp"

using namespace coaat;
using namespace coaat::test;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using Clock_ = std::chrono::steady_clock;

namespace limits {
constexpr double fee_table_seconds = 1.0;
constexpr double scenario_seconds = 5.0;
constexpr int zero_cost_reads = 100;
constexpr int tamper_trials = 100;
constexpr int replay_sequences = 1000;
constexpr int replay_max_actions = 50;
constexpr int invariant_cases = 1000;
constexpr int invariant_actions = 50;
constexpr int property_pool = 50;
constexpr int property_duplicates = 10;
constexpr int identity_documents = 200;
constexpr int svc_codes = 100000;
constexpr int svc_corrupted_codes = 1000;
constexpr double svc_min_detection = 31.0 / 32.0;
}  // namespace limits

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(Clock_::time_point t)
{
    return std::chrono::duration<double>(Clock_::now() - t).count();
}

std::string fmt(double v, int places = 3)
{
    std::ostringstream s;
    s.precision(places);
    s << std::fixed << v;
    return s.str();
}

struct Served {
    World world;
    Service service;
    std::string url;

    explicit Served(Engine::Options opts = test_options())
        : world(std::move(opts)), service(world.engine, [] {
              ServiceConfig c;
              c.port = 0;
              return c;
          }())
    {
        url = "http://127.0.0.1:" + std::to_string(service.start());
    }
};

std::vector<json> json_lines(const std::string& text)
{
    std::vector<json> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        if (!line.empty() && line.front() == '{')
            out.push_back(json::parse(line));
    return out;
}

Outcome fee_table()
{
    // Published fee per kind in BNB, and the same fees priced at
    // the configured 302.80 USD/BNB and rounded half-up to cents.
    const std::map<std::string, std::pair<std::string, std::string>> expected{
        {"Kickoff", {"0.05250531", "15.90"}},          {"AddCoaat", {"0.00238626", "0.72"}},
        {"AddUser", {"0.00177261", "0.54"}},           {"RegisterProperty", {"0.03027519", "9.17"}},
        {"CreateDossier", {"0.00409118", "1.24"}},     {"AddFile", {"0.00304687", "0.92"}},
        {"RequestValidation", {"0.00000000", "0.00"}}, {"ValidateDossier", {"0.00000000", "0.00"}},
    };
    auto start = Clock_::now();

    // one transaction of each kind
    auto opts = test_options();
    Engine engine(std::move(opts));
    auto admin = make_actor("admin"), ca = make_actor("coaat"), staff = make_actor("staff");
    engine.kickoff(admin.address, admin.key);
    engine.add_coaat(admin.address, ca.address, "C", ca.key);
    engine.add_user(ca.address, staff.address, Role::CoaatStaff, "S", staff.key);
    engine.register_property(staff.address, kRefA, "d");
    auto id = engine.create_dossier(staff.address, kRefA, "m").value.id;
    engine.add_document(staff.address, id, make_document(engine, staff, id, "doc"));
    engine.request_validation(staff.address, id);
    auto orig = engine.store().get(engine.dossier(id)->documents[0].cid);
    engine.validate_dossier(ca.address, id, DossierStatus::Validated, {review_document(engine, ca, id, orig, "r")});

    ServiceConfig config;
    config.port = 0;
    Service service(engine, config);
    auto url = "http://127.0.0.1:" + std::to_string(service.start());

    std::ostringstream out, err;
    int code = run_cli({"--server", url, "--format", "json-lines", "cost-report"}, out, err);
    std::ostringstream text_out;
    run_cli({"--server", url, "cost-report"}, text_out, err);
    auto elapsed = seconds_since(start);

    int matched = 0;
    std::vector<std::string> bad;
    bool read_zero = false;
    for (const auto& row : json_lines(out.str())) {
        if (row["label"] == std::string(kReadLabel)) {
            read_zero = row["unit_bnb"] == "0.00000000" && row["total_bnb"] == "0.00000000";
            continue;
        }
        if (!row.contains("kind") || row["kind"].is_null())
            continue;
        auto it = expected.find(row["kind"].get<std::string>());
        if (it == expected.end())
            continue;
        if (row["unit_bnb"] == it->second.first && row["unit_usd"] == it->second.second && row["count"] == 1)
            ++matched;
        else
            bad.push_back(it->first + "=" + row["unit_bnb"].get<std::string>() + "/" +
                          row["unit_usd"].get<std::string>());
    }
    bool text_ok = text_out.str().find("Add COAAT (Role 1)") != std::string::npos &&
                   text_out.str().find("0.00238626") != std::string::npos;
    bool pass = code == 0 && matched == 8 && read_zero && text_ok && elapsed < limits::fee_table_seconds;
    std::string detail = std::to_string(matched) + "/8 kinds bit-exact in BNB and USD@302.80, reads 0, " +
                         fmt(elapsed) + " s";
    for (const auto& b : bad)
        detail += ", mismatch " + b;
    return {pass, detail};
}

Outcome zero_cost_reads()
{
    Served s;
    auto& w = s.world;
    auto id = w.open_dossier_with_docs(2);
    w.decide(id, DossierStatus::Validated);
    auto svcs = w.engine.dossier(id)->documents;

    Client reader(s.url), staff(s.url), admin(s.url);
    reader.login(w.reader.address, w.reader.key);
    staff.login(w.staff.address, w.staff.key);
    admin.login(w.coaat_admin.address, w.coaat_admin.key);

    auto height = w.engine.ledger().height();
    auto fees = w.engine.ledger().fees_charged_bnb();
    int ok = 0;
    for (int i = 0; i < limits::zero_cost_reads; ++i) {
        const auto& svc = svcs[i % svcs.size()].svc.str();
        switch (i % 3) {
        case 0: ok += reader.view(svc).body.size() > 0; break;
        case 1: ok += staff.list_dossiers(kRefA)["dossiers"].size() == 1; break;
        case 2: ok += admin.view(svc).provenance.count("Cid") == 1; break;
        }
    }
    auto report = Client(s.url).costs();
    bool read_line_zero = false;
    for (const auto& l : report["lines"])
        if (l["label"] == std::string(kReadLabel))
            read_line_zero = l["total_bnb"] == "0.00000000";
    auto added = w.engine.ledger().height() - height;
    bool pass = ok == limits::zero_cost_reads && added == 0 && w.engine.ledger().fees_charged_bnb() == fees &&
                read_line_zero;
    return {pass, std::to_string(ok) + " reads, " + std::to_string(added) + " blocks appended, fees " + fees.to_string() +
                      " -> " + w.engine.ledger().fees_charged_bnb().to_string()};
}

std::vector<json> golden(const std::string& file)
{
    std::ifstream in(fs::path(COAAT_GOLDEN_DIR) / file);
    std::stringstream ss;
    ss << in.rdbuf();
    return json_lines(ss.str());
}

Outcome scenarios()
{
    std::string detail;
    bool pass = true;
    for (const std::string name : {"fig2", "fig3"}) {
        auto start = Clock_::now();
        std::ostringstream out, err;
        int code = run_scenario(name, true, out, err);
        auto elapsed = seconds_since(start);

        std::vector<json> chain, events;
        for (auto& line : json_lines(out.str()))
            (line.contains("block_hash") ? chain : events).push_back(line);
        auto want = golden(name + ".jsonl");
        bool chain_ok = chain.size() == want.size();
        for (std::size_t i = 0; chain_ok && i < want.size(); ++i)
            for (const char* f : {"height", "kind", "sender", "fee_bnb"})
                chain_ok = chain_ok && chain[i][f] == want[i][f];
        auto want_events = name == "fig3" ? golden("fig3.events.jsonl") : std::vector<json>{};
        bool events_ok = events.size() == want_events.size();
        for (std::size_t i = 0; events_ok && i < want_events.size(); ++i)
            events_ok = events[i]["kind"] == want_events[i]["kind"] &&
                        events[i]["audience"] == want_events[i]["audience"];
        bool ok = code == 0 && chain_ok && events_ok && elapsed < limits::scenario_seconds;
        pass = pass && ok;
        detail += (detail.empty() ? "" : "; ") + name + ": " + std::to_string(chain.size()) + " blocks " +
                  (chain_ok ? "match" : "DIFFER") + ", " + std::to_string(events.size()) + " events " +
                  (events_ok ? "match" : "DIFFER") + ", " + fmt(elapsed) + " s";
        if (code != 0)
            detail += " [" + err.str() + "]";
    }
    return {pass, detail};
}

Outcome tamper_evidence()
{
    TempDir tmp;
    auto data = tmp.path / "data";
    {
        auto opts = test_options();
        opts.data_dir = data;
        World w(opts);
        auto a = w.open_dossier_with_docs(3);
        w.decide(a, DossierStatus::Validated);
        w.open_dossier_with_docs(1);
    }
    auto chain_file = data / "chain.bin";
    std::string pristine;
    {
        std::ifstream in(chain_file, std::ios::binary);
        pristine.assign(std::istreambuf_iterator<char>(in), {});
    }
    auto audit = [&] {
        std::ostringstream out, err;
        return run_cli({"audit", "--data-dir", data.string()}, out, err);
    };
    int clean_pass = audit() == 0;

    std::mt19937_64 rng(20231);
    int detected = 0;
    for (int t = 0; t < limits::tamper_trials; ++t) {
        auto mutated = pristine;
        auto pos = std::uniform_int_distribution<std::size_t>(0, mutated.size() - 1)(rng);
        auto flip = static_cast<char>(std::uniform_int_distribution<int>(1, 255)(rng));
        mutated[pos] = static_cast<char>(mutated[pos] ^ flip);
        std::ofstream(chain_file, std::ios::binary | std::ios::trunc) << mutated;
        detected += audit() != 0;
    }
    std::ofstream(chain_file, std::ios::binary | std::ios::trunc) << pristine;
    clean_pass += audit() == 0;
    bool pass = detected == limits::tamper_trials && clean_pass == 2;
    return {pass, std::to_string(detected) + "/" + std::to_string(limits::tamper_trials) +
                      " mutations detected, unmutated chain passes " + std::to_string(clean_pass) + "/2, " +
                      std::to_string(pristine.size()) + " bytes"};
}

Outcome replay_determinism()
{
    std::mt19937_64 rng(77);
    int identical = 0;
    std::size_t txs = 0;
    for (int i = 0; i < limits::replay_sequences; ++i) {
        RandomSession s(static_cast<std::uint64_t>(i) + 1, true);
        s.run(std::uniform_int_distribution<int>(1, limits::replay_max_actions)(rng));
        auto log = s.engine().ledger().tx_log();
        txs += log.size();
        ContractState a, b;
        auto ra = Ledger::replay(log, s.engine().ledger().schedule(), a);
        auto rb = Ledger::replay(log, s.engine().ledger().schedule(), b);
        identical += ra == rb && ra == s.engine().state_root() && a.snapshot() == b.snapshot();
    }
    return {identical == limits::replay_sequences,
            std::to_string(identical) + "/" + std::to_string(limits::replay_sequences) +
                " sequences replay to an identical state_root (" + std::to_string(txs) + " transactions)"};
}

Outcome invariants()
{
    std::size_t violations = 0, denied = 0, accepted = 0;
    std::string first;
    for (int i = 0; i < limits::invariant_cases; ++i) {
        RandomSession s(static_cast<std::uint64_t>(i) + 50'000, i % 2 == 0);
        s.run(limits::invariant_actions);
        violations += s.violations().size();
        denied += s.denied();
        accepted += s.accepted();
        if (first.empty() && !s.violations().empty())
            first = s.violations().front();
    }
    std::string detail = std::to_string(limits::invariant_cases) + " cases, " + std::to_string(accepted) +
                         " accepted / " + std::to_string(denied) + " denied actions, " +
                         std::to_string(violations) + " violations";
    if (!first.empty())
        detail += " (first: " + first + ")";
    return {violations == 0 && accepted > 0 && denied > 0, detail};
}

Outcome duplicate_property()
{
    std::mt19937_64 rng(50);
    const std::string alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    std::vector<std::string> pool;
    std::set<std::string> distinct;
    while (static_cast<int>(distinct.size()) < limits::property_pool - limits::property_duplicates) {
        std::string ref;
        for (int i = 0; i < 20; ++i)
            ref += alphabet[rng() % alphabet.size()];
        if (distinct.insert(ref).second)
            pool.push_back(ref);
    }
    for (int i = 0; i < limits::property_duplicates; ++i)
        pool.push_back(pool[rng() % (pool.size() - i)]);
    std::shuffle(pool.begin(), pool.end(), rng);

    // every ordered pair on a fresh registry: the second registration fails
    // exactly when the refs are equal
    int wrong = 0, pairs = 0, expected_dupes = 0;
    for (std::size_t i = 0; i < pool.size(); ++i)
        for (std::size_t j = i + 1; j < pool.size(); ++j) {
            World w;
            w.engine.register_property(w.staff.address, pool[i], "first");
            std::optional<Errc> code;
            try {
                w.engine.register_property(w.other_staff.address, pool[j], "second");
            } catch (const Error& e) {
                code = e.code();
            }
            bool dup = pool[i] == pool[j];
            expected_dupes += dup;
            wrong += dup ? code != Errc::DuplicateProperty : code.has_value();
            ++pairs;
        }

    // the whole pool in sequence: exactly the repeated refs fail
    World w;
    std::set<std::string> seen;
    int seq_failures = 0, seq_wrong = 0;
    for (const auto& ref : pool) {
        bool dup = !seen.insert(ref).second;
        try {
            w.engine.register_property(w.staff.address, ref, "d");
            seq_wrong += dup;
        } catch (const Error& e) {
            ++seq_failures;
            seq_wrong += !(dup && e.code() == Errc::DuplicateProperty);
        }
    }
    bool pass = wrong == 0 && seq_wrong == 0 && seq_failures == limits::property_duplicates;
    return {pass, std::to_string(pairs) + " pairs (" + std::to_string(expected_dupes) + " equal), " +
                      std::to_string(wrong) + " wrong; sequential pass rejected " + std::to_string(seq_failures) +
                      "/" + std::to_string(limits::property_duplicates) + " duplicates"};
}

Outcome document_identity()
{
    World w;
    std::mt19937_64 rng(200);
    int made = 0;
    DossierId current;
    int in_current = 0;
    const std::string alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    while (made < limits::identity_documents) {
        if (in_current == 0) {
            std::string ref;
            for (int i = 0; i < 20; ++i)
                ref += alphabet[rng() % alphabet.size()];
            w.engine.register_property(w.staff.address, ref, "p");
            current = w.engine.create_dossier(w.staff.address, ref, "m").value.id;
        }
        std::string content = "document " + std::to_string(made) + "\n";
        auto extra = rng() % 200;
        for (std::uint64_t i = 0; i < extra; ++i)
            content += static_cast<char>(' ' + rng() % 94);
        w.engine.add_document(w.staff.address, current, make_document(w.engine, w.staff, current, content));
        ++made;
        in_current = (in_current + 1) % 10;
    }

    int verified = 0, mutations = 0, caught = 0;
    std::vector<DocumentRecord> records;
    for (const auto& p : w.engine.unsafe_state().properties())
        for (const auto& d : p.second.dossiers)
            records.insert(records.end(), d.documents.begin(), d.documents.end());

    auto checks = [&](const Bytes& body, const DocumentRecord& rec) {
        bool cid = Cid::of(body) == rec.cid;
        bool svc = false, sig = false;
        try {
            svc = extract_svc(body) == rec.svc;
            verify(SignedDocument{body, rec.svc, rec.uploader, rec.signature}, w.engine.keys());
            sig = true;
        } catch (const Error&) {
        }
        return std::array<bool, 3>{cid, svc, sig};
    };
    for (const auto& rec : records) {
        auto body = w.engine.store().get(rec.cid);
        auto c = checks(body, rec);
        verified += c[0] && c[1] && c[2];
        for (std::size_t pos = 0; pos < body.size(); ++pos) {
            auto mutated = body;
            mutated[pos] ^= static_cast<std::uint8_t>(1 + rng() % 255);
            auto m = checks(mutated, rec);
            ++mutations;
            caught += !(m[0] && m[1] && m[2]);
        }
    }
    bool pass = static_cast<int>(records.size()) == limits::identity_documents &&
                verified == limits::identity_documents && caught == mutations;
    return {pass, std::to_string(verified) + "/" + std::to_string(records.size()) +
                      " documents re-verify (CID, SVC, signature); " + std::to_string(caught) + "/" +
                      std::to_string(mutations) + " single-byte mutations break a check"};
}

Outcome svc_strength()
{
    SystemEntropy entropy;
    std::set<std::string> codes;
    int valid = 0;
    for (int i = 0; i < limits::svc_codes; ++i) {
        auto s = generate_svc(entropy).str();
        valid += Svc::checksum_valid(s);
        codes.insert(s);
    }
    auto collisions = limits::svc_codes - static_cast<int>(codes.size());

    std::array<int, Svc::kLength> detected{};
    std::array<int, Svc::kLength> tried{};
    int n = 0;
    for (auto it = codes.begin(); n < limits::svc_corrupted_codes; ++it, ++n)
        for (std::size_t pos = 0; pos < Svc::kLength; ++pos)
            for (char c : kCrockfordAlphabet) {
                if (c == (*it)[pos])
                    continue;
                auto bad = *it;
                bad[pos] = c;
                ++tried[pos];
                detected[pos] += !Svc::checksum_valid(bad);
            }
    double worst = 1.0;
    for (std::size_t pos = 0; pos < Svc::kLength; ++pos)
        worst = std::min(worst, static_cast<double>(detected[pos]) / tried[pos]);
    bool pass = collisions == 0 && valid == limits::svc_codes && worst >= limits::svc_min_detection;
    return {pass, std::to_string(limits::svc_codes) + " codes, " + std::to_string(collisions) + " collisions, " +
                      std::to_string(valid) + " checksum-valid; worst per-position detection " + fmt(worst, 4) +
                      " over " + std::to_string(limits::svc_corrupted_codes) + " codes (bound " +
                      fmt(limits::svc_min_detection, 4) + ")"};
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"fee-table-reproduction", fee_table},
        {"zero-cost-reads", zero_cost_reads},
        {"sequence-diagram-scenarios", scenarios},
        {"tamper-evidence", tamper_evidence},
        {"replay-determinism", replay_determinism},
        {"one-open-dossier-and-authorization", invariants},
        {"duplicate-property-oracle", duplicate_property},
        {"document-identity", document_identity},
        {"svc-collision-and-checksum", svc_strength},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        auto start = Clock_::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << "  " << o.detail << "  [" << fmt(seconds_since(start))
                  << " s]" << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed;
}
