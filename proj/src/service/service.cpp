#include <cstdlib>

#include "coaat/crypto.hpp"
#include "coaat/service.hpp"
#include "httplib.h"
#include "wire.hpp"

namespace coaat {

using wire::json;

int http_status(Errc code) noexcept
{
    switch (code) {
    case Errc::UnknownToken:
    case Errc::InvalidKeyProof:
        return 401;
    case Errc::Unauthorized:
    case Errc::NotYetValidated:
        return 403;
    case Errc::UnknownProperty:
    case Errc::UnknownDossier:
    case Errc::UnknownSvc:
    case Errc::NotFound:
        return 404;
    case Errc::AlreadyInitialized:
    case Errc::NotInitialized:
    case Errc::AddressAlreadyRegistered:
    case Errc::DuplicateProperty:
    case Errc::DossierAlreadyOpen:
    case Errc::DossierNotOpen:
    case Errc::WrongStatus:
    case Errc::EmptyDossier:
    case Errc::DuplicateNonce:
        return 409;
    case Errc::ContentTooLarge:
        return 413;
    case Errc::InvalidRole:
    case Errc::MalformedCadastralRef:
    case Errc::ReviewCountMismatch:
    case Errc::SvcMismatch:
    case Errc::SignatureInvalid:
    case Errc::UnknownSigner:
    case Errc::MissingSvcMarker:
    case Errc::MarkerAlreadyPresent:
    case Errc::MalformedSvc:
    case Errc::EmptyContent:
    case Errc::MalformedPayload:
    case Errc::MalformedInput:
        return 422;
    case Errc::IntegrityViolation:
    case Errc::RejectedByContract:
    case Errc::ReplayDivergence:
    case Errc::CorruptChain:
    case Errc::IoError:
        return 500;
    }
    return 500;
}

ServiceConfig ServiceConfig::from_env()
{
    ServiceConfig c;
    if (const char* v = std::getenv("COAAT_LISTEN"))
        c.set_listen(v);
    if (const char* v = std::getenv("COAAT_DATA_DIR"))
        c.data_dir = v;
    if (const char* v = std::getenv("COAAT_FEES"))
        c.fees_file = v;
    if (const char* v = std::getenv("COAAT_USD_PER_BNB"))
        c.usd_per_bnb = Decimal::parse(v);
    return c;
}

void ServiceConfig::set_listen(std::string_view host_port)
{
    auto colon = host_port.rfind(':');
    if (colon == std::string_view::npos)
        throw Error(Errc::MalformedInput, "listen address must be host:port");
    host = std::string(host_port.substr(0, colon));
    try {
        port = std::stoi(std::string(host_port.substr(colon + 1)));
    } catch (const std::exception&) {
        throw Error(Errc::MalformedInput, "bad port in " + std::string(host_port));
    }
}

FeeSchedule ServiceConfig::schedule() const
{
    auto s = fees_file ? FeeSchedule::load(*fees_file) : FeeSchedule::standard();
    if (usd_per_bnb)
        s.set_usd_per_bnb(*usd_per_bnb);
    return s;
}

namespace {

using httplib::Request;
using httplib::Response;

void send_json(Response& res, const json& body, int status = 200)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(Response& res, const Error& e)
{
    auto code = e.root();
    send_json(res, {{"error", error_name(code)}, {"detail", e.what()}}, http_status(code));
}

json parse_body(const Request& req)
{
    try {
        auto body = json::parse(req.body.empty() ? std::string("{}") : req.body);
        if (!body.is_object())
            throw Error(Errc::MalformedInput, "request body must be an object");
        return body;
    } catch (const json::exception& e) {
        throw Error(Errc::MalformedInput, e.what());
    }
}

template <class T>
T field(const json& body, const char* name)
{
    if (!body.contains(name))
        throw Error(Errc::MalformedInput, std::string("missing field ") + name);
    try {
        return body.at(name).get<T>();
    } catch (const json::exception&) {
        throw Error(Errc::MalformedInput, std::string("bad field ") + name);
    }
}

std::string optional_field(const json& body, const char* name)
{
    return body.contains(name) ? field<std::string>(body, name) : std::string{};
}

std::string form_value(const Request& req, const std::string& name)
{
    if (!req.has_file(name))
        throw Error(Errc::MalformedInput, "missing form field " + name);
    return req.get_file_value(name).content;
}

Hash32 signature_field(const std::string& hex)
{
    return fixed_from_hex<32>(hex);
}

SignedDocument document_from(const std::string& body, const std::string& signature_hex, const Address& signer)
{
    auto bytes = to_bytes(body);
    auto svc = extract_svc(bytes);
    return SignedDocument{std::move(bytes), svc, signer, signature_field(signature_hex)};
}

std::uint64_t query_u64(const Request& req, const char* name, std::uint64_t fallback)
{
    if (!req.has_param(name))
        return fallback;
    try {
        return std::stoull(req.get_param_value(name));
    } catch (const std::exception&) {
        throw Error(Errc::MalformedInput, std::string("bad query parameter ") + name);
    }
}

}  // namespace

Service::Service(Engine& engine, ServiceConfig config)
    : engine_(engine), config_(std::move(config)), server_(std::make_unique<httplib::Server>())
{
    auto threads = static_cast<std::size_t>(config_.worker_threads);
    server_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    routes();
}

Service::~Service()
{
    stop();
}

int Service::bind()
{
    if (config_.port == 0)
        port_ = server_->bind_to_any_port(config_.host);
    else if (server_->bind_to_port(config_.host, config_.port))
        port_ = config_.port;
    else
        port_ = -1;
    if (port_ < 0)
        throw Error(Errc::IoError, "cannot listen on " + config_.host + ":" + std::to_string(config_.port));
    return port_;
}

int Service::start()
{
    bind();
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void Service::run()
{
    bind();
    server_->listen_after_bind();
}

void Service::stop()
{
    if (server_)
        server_->stop();
    if (thread_.joinable())
        thread_.join();
}

std::string Service::issue_challenge(const Address& address)
{
    Bytes raw(16);
    random_bytes(raw);
    auto nonce = "coaat-login-" + to_hex(raw);
    std::lock_guard lock(auth_mutex_);
    auto now = std::chrono::steady_clock::now();
    std::erase_if(challenges_, [&](const auto& kv) { return kv.second.second < now; });
    challenges_[nonce] = {address, now + std::chrono::minutes(5)};
    return nonce;
}

std::string Service::login(const Address& address, const std::string& nonce, const std::string& proof_hex)
{
    {
        std::lock_guard lock(auth_mutex_);
        auto it = challenges_.find(nonce);
        if (it == challenges_.end() || it->second.first != address ||
            it->second.second < std::chrono::steady_clock::now())
            throw Error(Errc::InvalidKeyProof, "unknown or expired challenge");
        challenges_.erase(it);
    }
    auto key = engine_.keys().find(address);
    if (!key || !engine_.user(address))
        throw Error(Errc::InvalidKeyProof, "no key registered for " + address.to_string());
    auto proof = fixed_from_hex<32>(proof_hex);
    auto expected = key_proof(*key, nonce);
    if (!constant_time_equal(proof, expected))
        throw Error(Errc::InvalidKeyProof, "key proof does not match");

    Bytes raw(32);
    random_bytes(raw);
    auto token = to_hex(raw);
    std::lock_guard lock(auth_mutex_);
    sessions_[token] = Session{address, std::chrono::steady_clock::now() + config_.token_ttl};
    return token;
}

Address Service::authenticate(const std::string& header)
{
    constexpr std::string_view prefix = "Bearer ";
    if (!header.starts_with(prefix))
        throw Error(Errc::UnknownToken, "missing bearer token");
    auto token = header.substr(prefix.size());
    std::lock_guard lock(auth_mutex_);
    auto it = sessions_.find(token);
    if (it == sessions_.end())
        throw Error(Errc::UnknownToken, "unknown token");
    if (it->second.expires < std::chrono::steady_clock::now()) {
        sessions_.erase(it);
        throw Error(Errc::UnknownToken, "token expired");
    }
    return it->second.address;
}

void Service::routes()
{
    auto& s = *server_;
    const auto& schedule = engine_.ledger().schedule();

    auto open = [](auto handler) {
        return [handler](const Request& req, Response& res) {
            try {
                handler(req, res);
            } catch (const Error& e) {
                send_error(res, e);
            }
        };
    };
    auto authed = [this, open](auto handler) {
        return open([this, handler](const Request& req, Response& res) {
            auto caller = authenticate(req.get_header_value("Authorization"));
            handler(caller, req, res);
        });
    };

    s.set_exception_handler([](const Request&, Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            send_json(res, {{"error", "IoError"}, {"detail", e.what()}}, 500);
        }
    });

    s.Get("/status", open([this](const Request&, Response& res) {
        send_json(res, {{"height", engine_.ledger().height()},
                        {"state_root", to_hex(engine_.state_root())},
                        {"initialized", engine_.ledger().height() > 0}});
    }));

    s.Post("/auth/challenge", open([this](const Request& req, Response& res) {
        auto body = parse_body(req);
        auto address = Address::parse(field<std::string>(body, "address"));
        send_json(res, {{"nonce", issue_challenge(address)}});
    }));

    s.Post("/auth/login", open([this](const Request& req, Response& res) {
        auto body = parse_body(req);
        auto address = Address::parse(field<std::string>(body, "address"));
        auto token = login(address, field<std::string>(body, "nonce"), field<std::string>(body, "proof"));
        auto user = *engine_.user(address);
        send_json(res, {{"token", token},
                        {"address", address.to_string()},
                        {"role", static_cast<int>(user.role)},
                        {"expires_in", config_.token_ttl.count()}});
    }));

    s.Post("/kickoff", open([this, &schedule](const Request& req, Response& res) {
        auto body = parse_body(req);
        auto address = Address::parse(field<std::string>(body, "address"));
        auto key = SigningKey::parse(field<std::string>(body, "key"));
        send_json(res, {{"receipt", wire::to_json(engine_.kickoff(address, key), schedule)}}, 201);
    }));

    s.Post("/coaats", authed([this, &schedule](const Address& caller, const Request& req, Response& res) {
        auto body = parse_body(req);
        auto r = engine_.add_coaat(caller, Address::parse(field<std::string>(body, "admin")),
                                   field<std::string>(body, "name"),
                                   SigningKey::parse(field<std::string>(body, "key")),
                                   optional_field(body, "admin_name"));
        send_json(res, {{"coaat_id", r.value}, {"receipt", wire::to_json(r.receipt, schedule)}}, 201);
    }));

    s.Post("/users", authed([this, &schedule](const Address& caller, const Request& req, Response& res) {
        auto body = parse_body(req);
        auto role = role_from_int(field<int>(body, "role"));
        if (!role)
            throw Error(Errc::InvalidRole, "role must be 0..3");
        auto r = engine_.add_user(caller, Address::parse(field<std::string>(body, "address")), *role,
                                  optional_field(body, "name"), SigningKey::parse(field<std::string>(body, "key")));
        send_json(res, {{"user", wire::to_json(r.value)}, {"receipt", wire::to_json(r.receipt, schedule)}}, 201);
    }));

    s.Post("/properties", authed([this, &schedule](const Address& caller, const Request& req, Response& res) {
        auto body = parse_body(req);
        auto r = engine_.register_property(caller, field<std::string>(body, "cadastral_ref"),
                                           optional_field(body, "cadastral_data"));
        send_json(res, {{"property", wire::to_json(r.value)}, {"receipt", wire::to_json(r.receipt, schedule)}},
                  201);
    }));

    s.Post(R"(/properties/([^/]+)/dossiers)",
           authed([this, &schedule](const Address& caller, const Request& req, Response& res) {
               auto body = parse_body(req);
               auto r = engine_.create_dossier(caller, req.matches[1], optional_field(body, "metadata"));
               send_json(res,
                         {{"dossier", wire::to_json(r.value)}, {"receipt", wire::to_json(r.receipt, schedule)}},
                         201);
           }));

    s.Get(R"(/properties/([^/]+)/dossiers)",
          authed([this](const Address& caller, const Request& req, Response& res) {
              json list = json::array();
              for (const auto& d : engine_.list_dossiers(caller, req.matches[1]))
                  list.push_back(wire::to_json(d));
              send_json(res, {{"cadastral_ref", std::string(req.matches[1])}, {"dossiers", list}});
          }));

    s.Post(R"(/dossiers/([^/]+)/svc)", authed([this](const Address& caller, const Request& req, Response& res) {
        auto svc = engine_.reserve_svc(caller, DossierId::parse(std::string(req.matches[1])));
        send_json(res, {{"svc", svc.str()}, {"marker", svc_marker_line(svc)}}, 201);
    }));

    s.Post(R"(/dossiers/([^/]+)/documents)",
           authed([this, &schedule](const Address& caller, const Request& req, Response& res) {
               auto id = DossierId::parse(std::string(req.matches[1]));
               auto doc = document_from(form_value(req, "body"), form_value(req, "signature"), caller);
               auto r = engine_.add_document(caller, id, doc);
               send_json(res,
                         {{"document", wire::to_json(r.value)}, {"receipt", wire::to_json(r.receipt, schedule)}},
                         201);
           }));

    s.Post(R"(/dossiers/([^/]+)/submit)",
           authed([this, &schedule](const Address& caller, const Request& req, Response& res) {
               auto r = engine_.request_validation(caller, DossierId::parse(std::string(req.matches[1])));
               send_json(res, {{"event", wire::to_json(r.value)}, {"receipt", wire::to_json(r.receipt, schedule)}},
                         201);
           }));

    s.Post(R"(/dossiers/([^/]+)/decision)",
           authed([this, &schedule](const Address& caller, const Request& req, Response& res) {
               auto id = DossierId::parse(std::string(req.matches[1]));
               auto text = form_value(req, "decision");
               for (auto& c : text)
                   c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
               DossierStatus decision;
               if (text == "validated")
                   decision = DossierStatus::Validated;
               else if (text == "rejected")
                   decision = DossierStatus::Rejected;
               else
                   throw Error(Errc::MalformedInput, "decision must be validated or rejected");
               std::vector<SignedDocument> reviewed;
               for (std::size_t i = 0; req.has_file("review_" + std::to_string(i)); ++i)
                   reviewed.push_back(document_from(form_value(req, "review_" + std::to_string(i)),
                                                    form_value(req, "signature_" + std::to_string(i)), caller));
               auto r = engine_.validate_dossier(caller, id, decision, reviewed);
               send_json(res,
                         {{"dossier", wire::to_json(r.value)}, {"receipt", wire::to_json(r.receipt, schedule)}});
           }));

    s.Get(R"(/documents/([^/]+))", authed([this](const Address& caller, const Request& req, Response& res) {
        auto view = engine_.view_document(caller, Svc::parse(std::string(req.matches[1])));
        res.set_header("X-Coaat-Svc", view.record.svc.str());
        res.set_header("X-Coaat-Cid", view.record.cid.to_string());
        res.set_header("X-Coaat-Version", std::string(to_string(view.record.version)));
        res.set_header("X-Coaat-Dossier", view.dossier.to_string());
        res.set_header("X-Coaat-Status", std::string(to_string(view.status)));
        res.set_header("X-Coaat-Uploader", view.record.uploader.to_string());
        res.set_header("X-Coaat-Tx-Hash", to_hex(view.record.tx_hash));
        res.set_header("X-Coaat-Block-Height", std::to_string(view.block_height));
        res.set_header("X-Coaat-Timestamp", std::to_string(view.record.timestamp));
        res.set_header("X-Coaat-Signature", to_hex(view.record.signature));
        res.set_content(to_string(view.body), "application/octet-stream");
    }));

    s.Get("/chain/audit", open([this](const Request&, Response& res) {
        auto blocks = engine_.ledger().blocks();
        auto report = verify_blocks(blocks);
        send_json(res, {{"ok", report.ok},
                        {"blocks_checked", report.blocks_checked},
                        {"first_corrupt_height",
                         report.first_corrupt_height ? json(*report.first_corrupt_height) : json(nullptr)},
                        {"height", blocks.size() - 1},
                        {"state_root", to_hex(blocks.back().state_root)},
                        {"chain", wire::chain_lines(blocks, engine_.ledger().schedule())}});
    }));

    s.Get("/costs/report", open([this](const Request&, Response& res) {
        const auto& schedule = engine_.ledger().schedule();
        auto body = wire::to_json(engine_.ledger().session_cost(), schedule);
        body["fees_charged_bnb"] = engine_.ledger().fees_charged_bnb().to_string();
        send_json(res, body);
    }));

    s.Get("/events", authed([this](const Address&, const Request& req, Response& res) {
        auto since = query_u64(req, "since", 0);
        std::optional<Role> role;
        if (req.has_param("role")) {
            role = role_from_int(static_cast<int>(query_u64(req, "role", 0)));
            if (!role)
                throw Error(Errc::MalformedInput, "role must be 0..3");
        }
        auto wait = std::min<std::uint64_t>(query_u64(req, "wait_ms", 0), config_.max_poll.count());
        auto events = wait > 0 ? engine_.wait_for_events(since, role, std::chrono::milliseconds(wait))
                               : engine_.events_since(since, role);
        json list = json::array();
        EventId cursor = since;
        for (const auto& e : events) {
            list.push_back(wire::to_json(e));
            cursor = std::max(cursor, e.id);
        }
        send_json(res, {{"events", list}, {"cursor", cursor}});
    }));
}

}  // namespace coaat
