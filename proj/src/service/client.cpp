#include "coaat/client.hpp"
#include "httplib.h"

namespace coaat {

using json = nlohmann::ordered_json;

namespace {

template <class Result>
const httplib::Response& checked(const Result& res)
{
    if (!res)
        throw TransportError("request failed: " + httplib::to_string(res.error()));
    if (res->status < 400)
        return *res;
    json body;
    try {
        body = json::parse(res->body);
    } catch (const json::exception&) {
        throw TransportError("HTTP " + std::to_string(res->status) + " without an error body");
    }
    auto name = body.value("error", std::string{});
    auto code = errc_from_name(name);
    if (!code)
        throw TransportError("HTTP " + std::to_string(res->status) + ": " + name);
    throw Error(*code, body.value("detail", std::string{}));
}

json parse(const httplib::Response& res)
{
    try {
        return json::parse(res.body);
    } catch (const json::exception& e) {
        throw TransportError(std::string("malformed response: ") + e.what());
    }
}

httplib::MultipartFormData part(std::string name, ByteView content)
{
    return {std::move(name), to_string(content), "document.bin", "application/octet-stream"};
}

httplib::MultipartFormData field(std::string name, std::string value)
{
    return {std::move(name), std::move(value), "", "text/plain"};
}

}  // namespace

Client::Client(const std::string& base_url) : http_(std::make_unique<httplib::Client>(base_url))
{
    if (!http_->is_valid())
        throw TransportError("invalid server URL " + base_url);
    http_->set_connection_timeout(5);
    http_->set_read_timeout(60);
}

Client::~Client() = default;
Client::Client(Client&&) noexcept = default;
Client& Client::operator=(Client&&) noexcept = default;

json Client::get(const std::string& path)
{
    httplib::Headers headers;
    if (!token_.empty())
        headers.emplace("Authorization", "Bearer " + token_);
    return parse(checked(http_->Get(path, headers)));
}

json Client::post(const std::string& path, const json& body)
{
    httplib::Headers headers;
    if (!token_.empty())
        headers.emplace("Authorization", "Bearer " + token_);
    return parse(checked(http_->Post(path, headers, body.dump(), "application/json")));
}

std::string Client::login(const Address& address, const SigningKey& key)
{
    auto challenge = post("/auth/challenge", {{"address", address.to_string()}});
    auto nonce = challenge.at("nonce").get<std::string>();
    auto res = post("/auth/login",
                    {{"address", address.to_string()}, {"nonce", nonce}, {"proof", to_hex(key_proof(key, nonce))}});
    token_ = res.at("token").get<std::string>();
    return token_;
}

json Client::status()
{
    return get("/status");
}

json Client::kickoff(const Address& admin, const SigningKey& key)
{
    return post("/kickoff", {{"address", admin.to_string()}, {"key", key.hex()}});
}

json Client::add_coaat(const Address& admin, const std::string& name, const SigningKey& key,
                       const std::string& admin_name)
{
    return post("/coaats",
                {{"admin", admin.to_string()}, {"name", name}, {"key", key.hex()}, {"admin_name", admin_name}});
}

json Client::add_user(const Address& user, int role, const std::string& name, const SigningKey& key)
{
    return post("/users", {{"address", user.to_string()}, {"role", role}, {"name", name}, {"key", key.hex()}});
}

json Client::register_property(const std::string& ref, const std::string& data)
{
    return post("/properties", {{"cadastral_ref", ref}, {"cadastral_data", data}});
}

json Client::create_dossier(const std::string& ref, const std::string& metadata)
{
    return post("/properties/" + ref + "/dossiers", {{"metadata", metadata}});
}

json Client::list_dossiers(const std::string& ref)
{
    return get("/properties/" + ref + "/dossiers");
}

Svc Client::reserve_svc(const std::string& dossier)
{
    return Svc::parse(post("/dossiers/" + dossier + "/svc", json::object()).at("svc").get<std::string>());
}

json Client::add_document(const std::string& dossier, const SignedDocument& doc)
{
    httplib::MultipartFormDataItems items{part("body", doc.body), field("signature", to_hex(doc.signature))};
    httplib::Headers headers{{"Authorization", "Bearer " + token_}};
    return parse(checked(http_->Post("/dossiers/" + dossier + "/documents", headers, items)));
}

json Client::submit(const std::string& dossier)
{
    return post("/dossiers/" + dossier + "/submit", json::object());
}

json Client::decide(const std::string& dossier, const std::string& decision,
                    const std::vector<SignedDocument>& reviewed)
{
    httplib::MultipartFormDataItems items{field("decision", decision)};
    for (std::size_t i = 0; i < reviewed.size(); ++i) {
        items.push_back(part("review_" + std::to_string(i), reviewed[i].body));
        items.push_back(field("signature_" + std::to_string(i), to_hex(reviewed[i].signature)));
    }
    httplib::Headers headers{{"Authorization", "Bearer " + token_}};
    return parse(checked(http_->Post("/dossiers/" + dossier + "/decision", headers, items)));
}

FetchedDocument Client::view(const std::string& svc)
{
    httplib::Headers headers{{"Authorization", "Bearer " + token_}};
    auto result = http_->Get("/documents/" + svc, headers);
    const auto& res = checked(result);
    FetchedDocument out;
    out.body = to_bytes(res.body);
    constexpr std::string_view prefix = "X-Coaat-";
    for (const auto& [name, value] : res.headers)
        if (name.size() > prefix.size() && std::equal(prefix.begin(), prefix.end(), name.begin(),
                                                      [](char a, char b) { return std::tolower(a) == std::tolower(b); }))
            out.provenance[name.substr(prefix.size())] = value;
    return out;
}

json Client::audit()
{
    return get("/chain/audit");
}

json Client::costs()
{
    return get("/costs/report");
}

json Client::events(std::uint64_t since, std::optional<int> role, int wait_ms)
{
    auto path = "/events?since=" + std::to_string(since);
    if (role)
        path += "&role=" + std::to_string(*role);
    if (wait_ms > 0)
        path += "&wait_ms=" + std::to_string(wait_ms);
    return get(path);
}

}  // namespace coaat
