#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include "coaat/documents.hpp"
#include "coaat/ledger.hpp"
#include "json.hpp"

namespace httplib {
class Client;
}

namespace coaat {

// The server could not be reached or answered with something other than the
// protocol's error shape.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FetchedDocument {
    Bytes body;
    std::map<std::string, std::string> provenance;  // X-Coaat-* headers, prefix stripped
};

/// Typed wrapper around the HTTP API. Protocol failures are rethrown as
/// coaat::Error carrying the server's error name.
class Client {
public:
    explicit Client(const std::string& base_url);
    ~Client();
    Client(Client&&) noexcept;
    Client& operator=(Client&&) noexcept;

    void set_token(std::string token) { token_ = std::move(token); }
    const std::string& token() const noexcept { return token_; }

    // Challenge + key proof; stores and returns the token.
    std::string login(const Address& address, const SigningKey& key);

    nlohmann::ordered_json status();
    nlohmann::ordered_json kickoff(const Address& admin, const SigningKey& key);
    nlohmann::ordered_json add_coaat(const Address& admin, const std::string& name, const SigningKey& key,
                             const std::string& admin_name = {});
    nlohmann::ordered_json add_user(const Address& user, int role, const std::string& name, const SigningKey& key);
    nlohmann::ordered_json register_property(const std::string& ref, const std::string& data);
    nlohmann::ordered_json create_dossier(const std::string& ref, const std::string& metadata);
    nlohmann::ordered_json list_dossiers(const std::string& ref);
    Svc reserve_svc(const std::string& dossier);
    nlohmann::ordered_json add_document(const std::string& dossier, const SignedDocument& doc);
    nlohmann::ordered_json submit(const std::string& dossier);
    nlohmann::ordered_json decide(const std::string& dossier, const std::string& decision,
                          const std::vector<SignedDocument>& reviewed);
    FetchedDocument view(const std::string& svc);
    nlohmann::ordered_json audit();
    nlohmann::ordered_json costs();
    nlohmann::ordered_json events(std::uint64_t since, std::optional<int> role = {}, int wait_ms = 0);

    nlohmann::ordered_json get(const std::string& path);
    nlohmann::ordered_json post(const std::string& path, const nlohmann::ordered_json& body);

private:
    std::unique_ptr<httplib::Client> http_;
    std::string token_;
};

}  // namespace coaat
