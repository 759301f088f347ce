#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "coaat/cli.hpp"
#include "coaat/client.hpp"
#include "coaat/service.hpp"

namespace coaat {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct Keyfile {
    Address address;
    SigningKey key;
};

Keyfile read_keyfile(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::IoError, "cannot read keyfile " + path);
    try {
        auto j = json::parse(in);
        auto key = SigningKey::parse(j.at("key").get<std::string>());
        auto address = j.contains("address") ? Address::parse(j["address"].get<std::string>()) : derive_address(key);
        return {address, key};
    } catch (const json::exception& e) {
        throw Error(Errc::MalformedInput, "keyfile " + path + ": " + e.what());
    }
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoError, "cannot read " + path);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_file(const std::string& path, ByteView bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error(Errc::IoError, "cannot write " + path);
}

FeeSchedule schedule_from(const std::string& fees, const std::string& rate)
{
    auto s = fees.empty() ? FeeSchedule::standard() : FeeSchedule::load(fees);
    if (!rate.empty())
        s.set_usd_per_bnb(Decimal::parse(rate));
    return s;
}

void print_cost_table(const json& report, bool json_lines, std::ostream& out)
{
    if (json_lines) {
        for (const auto& line : report["lines"])
            out << line.dump() << "\n";
        out << json{{"label", "Total"},
                    {"total_bnb", report["total_bnb"]},
                    {"total_usd", report["total_usd"]},
                    {"usd_per_bnb", report["usd_per_bnb"]}}
                   .dump()
            << "\n";
        return;
    }
    out << std::left << std::setw(36) << "Transaction" << std::right << std::setw(7) << "Count" << std::setw(14)
        << "Fee (BNB)" << std::setw(11) << "Fee (USD)" << std::setw(14) << "Total (BNB)" << std::setw(12)
        << "Total (USD)"
        << "\n";
    for (const auto& l : report["lines"])
        out << std::left << std::setw(36) << l["label"].get<std::string>() << std::right << std::setw(7)
            << l["count"].get<std::uint64_t>() << std::setw(14) << l["unit_bnb"].get<std::string>() << std::setw(11)
            << l["unit_usd"].get<std::string>() << std::setw(14) << l["total_bnb"].get<std::string>()
            << std::setw(12) << l["total_usd"].get<std::string>() << "\n";
    out << std::left << std::setw(57) << "Total" << std::right << std::setw(14) << report["total_bnb"].get<std::string>()
        << std::setw(12) << report["total_usd"].get<std::string>() << "\n";
    out << "USD per BNB: " << report["usd_per_bnb"].get<std::string>() << "\n";
}

json local_cost_report(const FeeSchedule& schedule, std::span<const Transaction> log)
{
    auto report = total_cost(log, schedule);
    json lines = json::array();
    for (const auto& l : report.lines)
        lines.push_back({{"label", l.label},
                         {"kind", l.kind ? json(std::string(to_string(*l.kind))) : json(nullptr)},
                         {"count", l.count},
                         {"unit_bnb", l.unit_bnb.to_string()},
                         {"unit_usd", l.unit_usd.to_string(2)},
                         {"total_bnb", l.total_bnb.to_string()},
                         {"total_usd", l.total_usd.to_string(2)}});
    return {{"usd_per_bnb", schedule.usd_per_bnb().to_string(2)},
            {"lines", lines},
            {"total_bnb", report.total_bnb.to_string()},
            {"total_usd", report.total_usd.to_string(2)}};
}

// Offline audit of a data directory. Returns the exit code.
int audit_directory(const fs::path& dir, const FeeSchedule& schedule, std::ostream& out, std::ostream& err)
{
    auto file = dir / "chain.bin";
    if (!fs::exists(file)) {
        err << "IoError: no chain at " << file.string() << "\n";
        return exit_code::protocol;
    }
    auto report = ChainFile::audit(file);
    try {
        out << export_chain(ChainFile(file).load(), schedule);
    } catch (const Error&) {
        // framing is broken; the summary below reports where
    }
    if (!report.ok) {
        err << "CorruptChain: first corrupt block at height " << *report.first_corrupt_height << "\n";
        out << "audit: CORRUPT at height " << *report.first_corrupt_height << "\n";
        return exit_code::protocol;
    }
    out << "audit: ok (" << report.blocks_checked << " blocks)\n";
    return exit_code::ok;
}

struct Context {
    std::string server;
    std::string token;
    std::string keyfile;
    std::string format = "text";
    std::ostream& out;
    std::ostream& err;

    bool json_lines() const { return format == "json-lines"; }

    Client client()
    {
        Client c(server);
        if (!token.empty())
            c.set_token(token);
        else if (!keyfile.empty()) {
            auto k = read_keyfile(keyfile);
            c.login(k.address, k.key);
        }
        return c;
    }

    Keyfile signer()
    {
        if (keyfile.empty())
            throw Error(Errc::MalformedInput, "--keyfile is required to sign documents");
        return read_keyfile(keyfile);
    }

    void print(const json& j) { out << (json_lines() ? j.dump() : j.dump(2)) << "\n"; }
};

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"COAAT dossier registry: service, operator commands and audit tools", "coaatctl"};
    app.require_subcommand(1);
    Context ctx{"http://127.0.0.1:8080", "", "", "text", out, err};
    auto* server_opt = app.add_option("--server", ctx.server, "Service base URL")->envname("COAAT_SERVER");
    app.add_option("--token", ctx.token, "Session token from `login`")->envname("COAAT_TOKEN");
    app.add_option("--keyfile", ctx.keyfile, "JSON keyfile {address, key}; logs in when no token is given")
        ->envname("COAAT_KEYFILE");
    app.add_option("--format", ctx.format, "Output format")->check(CLI::IsMember({"text", "json-lines"}));

    std::function<int()> action;

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    auto config = ServiceConfig::from_env();
    std::string listen, data_dir, fees, rate;
    serve->add_option("--listen", listen, "host:port (env COAAT_LISTEN)");
    serve->add_option("--data-dir", data_dir, "Persistent state directory (env COAAT_DATA_DIR)");
    serve->add_option("--fees", fees, "Fee schedule JSON (env COAAT_FEES)");
    serve->add_option("--rate", rate, "USD per BNB (env COAAT_USD_PER_BNB)");
    serve->callback([&] {
        action = [&] {
            if (!listen.empty())
                config.set_listen(listen);
            if (!data_dir.empty())
                config.data_dir = data_dir;
            if (!fees.empty())
                config.fees_file = fees;
            if (!rate.empty())
                config.usd_per_bnb = Decimal::parse(rate);
            Engine::Options opts;
            opts.schedule = config.schedule();
            opts.data_dir = config.data_dir;
            Engine engine(std::move(opts));
            Service service(engine, config);
            err << "listening on " << config.host << ":" << config.port << "\n";
            service.run();
            return exit_code::ok;
        };
    });

    // keygen
    auto* keygen = app.add_subcommand("keygen", "Create a keyfile");
    std::string key_out;
    keygen->add_option("--out", key_out, "Keyfile path")->required();
    keygen->callback([&] {
        action = [&] {
            SystemEntropy entropy;
            auto key = SigningKey::generate(entropy);
            auto address = derive_address(key);
            std::ofstream f(key_out, std::ios::trunc);
            f << json{{"address", address.to_string()}, {"key", key.hex()}}.dump(2) << "\n";
            if (!f)
                throw Error(Errc::IoError, "cannot write " + key_out);
            fs::permissions(key_out, fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace);
            out << address.to_string() << "\n";
            return exit_code::ok;
        };
    });

    // login
    app.add_subcommand("login", "Print a session token for --keyfile")->callback([&] {
        action = [&] {
            auto k = ctx.signer();
            Client c(ctx.server);
            out << c.login(k.address, k.key) << "\n";
            return exit_code::ok;
        };
    });

    // kickoff
    app.add_subcommand("kickoff", "Deploy the contract factory with --keyfile as Role 0")->callback([&] {
        action = [&] {
            auto k = ctx.signer();
            ctx.print(Client(ctx.server).kickoff(k.address, k.key));
            return exit_code::ok;
        };
    });

    // coaat add
    auto* coaat = app.add_subcommand("coaat", "COAAT registry")->require_subcommand(1);
    auto* coaat_add = coaat->add_subcommand("add", "Register a COAAT and its administrator (Role 1)");
    std::string new_keyfile, name, admin_name;
    coaat_add->add_option("--admin-keyfile", new_keyfile, "Keyfile of the new administrator")->required();
    coaat_add->add_option("--name", name, "COAAT name")->required();
    coaat_add->add_option("--admin-name", admin_name, "Administrator display name");
    coaat_add->callback([&] {
        action = [&] {
            auto k = read_keyfile(new_keyfile);
            ctx.print(ctx.client().add_coaat(k.address, name, k.key, admin_name));
            return exit_code::ok;
        };
    });

    // user add
    auto* user = app.add_subcommand("user", "User registry")->require_subcommand(1);
    auto* user_add = user->add_subcommand("add", "Register a surveyor (2) or reader (3)");
    int role = 2;
    user_add->add_option("--user-keyfile", new_keyfile, "Keyfile of the new user")->required();
    user_add->add_option("--role", role, "2 or 3")->required();
    user_add->add_option("--name", name, "Display name");
    user_add->callback([&] {
        action = [&] {
            auto k = read_keyfile(new_keyfile);
            ctx.print(ctx.client().add_user(k.address, role, name, k.key));
            return exit_code::ok;
        };
    });

    // property register
    auto* property = app.add_subcommand("property", "Properties")->require_subcommand(1);
    auto* prop_reg = property->add_subcommand("register", "Register a property by cadastral reference");
    std::string ref, text;
    prop_reg->add_option("ref", ref, "20-character cadastral reference")->required();
    prop_reg->add_option("--data", text, "Cadastral data");
    prop_reg->callback([&] {
        action = [&] {
            ctx.print(ctx.client().register_property(ref, text));
            return exit_code::ok;
        };
    });

    // dossier create|list|add-file|submit|decide
    auto* dossier = app.add_subcommand("dossier", "Dossiers")->require_subcommand(1);
    std::string dossier_id, file, out_path;
    auto* d_create = dossier->add_subcommand("create", "Open a dossier on a property");
    d_create->add_option("ref", ref, "Cadastral reference")->required();
    d_create->add_option("--metadata", text, "Free-form description");
    d_create->callback([&] {
        action = [&] {
            ctx.print(ctx.client().create_dossier(ref, text));
            return exit_code::ok;
        };
    });

    auto* d_list = dossier->add_subcommand("list", "List the dossiers of a property");
    d_list->add_option("ref", ref, "Cadastral reference")->required();
    d_list->callback([&] {
        action = [&] {
            ctx.print(ctx.client().list_dossiers(ref));
            return exit_code::ok;
        };
    });

    auto* d_add = dossier->add_subcommand("add-file", "Stamp a file with a fresh SVC, sign it and upload it");
    d_add->add_option("dossier", dossier_id, "Dossier id")->required();
    d_add->add_option("file", file, "Document to upload")->required()->check(CLI::ExistingFile);
    d_add->add_option("--out", out_path, "Also save the stamped document here");
    d_add->callback([&] {
        action = [&] {
            auto k = ctx.signer();
            auto c = ctx.client();
            auto svc = c.reserve_svc(dossier_id);
            auto doc = sign(embed_svc(as_bytes(read_file(file)), svc), k.address, k.key);
            auto res = c.add_document(dossier_id, doc);
            if (!out_path.empty())
                write_file(out_path, doc.body);
            ctx.print(res);
            return exit_code::ok;
        };
    });

    auto* d_submit = dossier->add_subcommand("submit", "Request validation");
    d_submit->add_option("dossier", dossier_id, "Dossier id")->required();
    d_submit->callback([&] {
        action = [&] {
            ctx.print(ctx.client().submit(dossier_id));
            return exit_code::ok;
        };
    });

    auto* d_decide = dossier->add_subcommand("decide", "Validate or reject, re-stamping every submitted file");
    std::string decision, note;
    d_decide->add_option("dossier", dossier_id, "Dossier id")->required();
    d_decide->add_option("decision", decision, "validated or rejected")
        ->required()
        ->check(CLI::IsMember({"validated", "rejected"}));
    d_decide->add_option("--note", note, "Line appended to every reviewed copy");
    d_decide->callback([&] {
        action = [&] {
            auto k = ctx.signer();
            auto c = ctx.client();
            auto id = DossierId::parse(dossier_id);
            auto listing = c.list_dossiers(id.cadastral_ref);
            std::vector<SignedDocument> reviewed;
            for (const auto& d : listing["dossiers"]) {
                if (d["id"] != dossier_id)
                    continue;
                for (const auto& rec : d.value("documents", json::array())) {
                    if (rec["version"] != "Submitted")
                        continue;
                    auto body = strip_svc(c.view(rec["svc"].get<std::string>()).body);
                    if (!note.empty()) {
                        auto line = to_bytes(note + "\n");
                        body.insert(body.end(), line.begin(), line.end());
                    }
                    reviewed.push_back(sign(embed_svc(body, c.reserve_svc(dossier_id)), k.address, k.key));
                }
            }
            ctx.print(c.decide(dossier_id, decision, reviewed));
            return exit_code::ok;
        };
    });

    // doc view
    auto* doc = app.add_subcommand("doc", "Documents")->require_subcommand(1);
    auto* doc_view = doc->add_subcommand("view", "Fetch a document by SVC (no transaction, no fee)");
    std::string svc_text;
    doc_view->add_option("svc", svc_text, "Secure Verification Code")->required();
    doc_view->add_option("--out", out_path, "Write the document here and print its provenance");
    doc_view->callback([&] {
        action = [&] {
            auto fetched = ctx.client().view(Svc::parse(svc_text).str());
            if (out_path.empty()) {
                out << to_string(fetched.body);
                return exit_code::ok;
            }
            write_file(out_path, fetched.body);
            json p = json::object();
            for (const auto& [k, v] : fetched.provenance)
                p[k] = v;
            ctx.print(p);
            return exit_code::ok;
        };
    });

    // svc reserve
    auto* svc = app.add_subcommand("svc", "Secure Verification Codes")->require_subcommand(1);
    auto* svc_reserve = svc->add_subcommand("reserve", "Reserve an SVC for a dossier");
    svc_reserve->add_option("dossier", dossier_id, "Dossier id")->required();
    svc_reserve->callback([&] {
        action = [&] {
            out << ctx.client().reserve_svc(dossier_id).str() << "\n";
            return exit_code::ok;
        };
    });

    // events
    auto* events = app.add_subcommand("events", "Poll dossier events");
    std::uint64_t since = 0;
    int wait_ms = 0;
    std::optional<int> event_role;
    events->add_option("--since", since, "Last event id already seen");
    events->add_option("--role", event_role, "Audience role filter");
    events->add_option("--wait-ms", wait_ms, "Long-poll timeout");
    events->callback([&] {
        action = [&] {
            auto res = ctx.client().events(since, event_role, wait_ms);
            for (const auto& e : res["events"])
                out << e.dump() << "\n";
            return exit_code::ok;
        };
    });

    // audit
    auto* audit = app.add_subcommand("audit", "Verify the hash chain and print the chain dump");
    std::string audit_dir;
    audit->add_option("--data-dir", audit_dir, "Audit a data directory offline instead of a server");
    audit->add_option("--fees", fees, "Fee schedule for the dump's fee column (offline)");
    audit->callback([&] {
        action = [&] {
            if (!audit_dir.empty())
                return audit_directory(audit_dir, schedule_from(fees, ""), out, err);
            auto report = Client(ctx.server).audit();
            for (const auto& line : report["chain"])
                out << line.dump() << "\n";
            if (!report["ok"].get<bool>()) {
                err << "CorruptChain: first corrupt block at height " << report["first_corrupt_height"] << "\n";
                out << "audit: CORRUPT at height " << report["first_corrupt_height"] << "\n";
                return exit_code::protocol;
            }
            out << "audit: ok (" << report["blocks_checked"] << " blocks)\n";
            return exit_code::ok;
        };
    });

    // cost-report
    auto* cost = app.add_subcommand("cost-report", "Per-kind fee table in BNB and USD");
    std::string cost_dir;
    cost->add_option("--fees", fees, "Fee schedule JSON (local modes)");
    cost->add_option("--rate", rate, "USD per BNB (local modes)");
    cost->add_option("--data-dir", cost_dir, "Price the transactions of a persisted chain");
    cost->callback([&] {
        action = [&] {
            json report;
            if (server_opt->count() > 0) {
                report = Client(ctx.server).costs();
            } else {
                auto schedule = schedule_from(fees, rate);
                std::vector<Transaction> log;
                if (!cost_dir.empty())
                    for (const auto& b : ChainFile(fs::path(cost_dir) / "chain.bin").load())
                        log.insert(log.end(), b.txs.begin(), b.txs.end());
                report = local_cost_report(schedule, log);
            }
            print_cost_table(report, ctx.json_lines(), out);
            return exit_code::ok;
        };
    });

    // scenario
    auto* scenario = app.add_subcommand("scenario", "Replay a sequence diagram against a fresh instance");
    std::string scenario_name;
    scenario->add_option("name", scenario_name, "fig2 or fig3")->required()->check(CLI::IsMember({"fig2", "fig3"}));
    scenario->callback([&] { action = [&] { return run_scenario(scenario_name, ctx.json_lines(), out, err); }; });

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        auto code = app.exit(e, out, err);
        return code == 0 ? exit_code::ok : exit_code::usage;
    }

    try {
        return action ? action() : exit_code::usage;
    } catch (const TransportError& e) {
        err << "connection error: " << e.what() << "\n";
        return exit_code::connection;
    } catch (const Error& e) {
        auto code = e.root();
        err << error_name(code) << (e.detail().empty() ? "" : ": " + e.detail()) << "\n";
        if (code == Errc::UnknownToken || code == Errc::InvalidKeyProof)
            return exit_code::auth;
        return exit_code::protocol;
    }
}

}  // namespace coaat
