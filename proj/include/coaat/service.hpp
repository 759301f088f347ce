#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "coaat/engine.hpp"

namespace httplib {
class Server;
}

namespace coaat {

// HTTP status for a protocol error; the body always carries error_name().
int http_status(Errc code) noexcept;

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<std::filesystem::path> data_dir;
    std::optional<std::filesystem::path> fees_file;
    std::optional<Decimal> usd_per_bnb;
    std::chrono::seconds token_ttl{3600};
    std::chrono::milliseconds max_poll{30000};
    int worker_threads = 16;

    // COAAT_LISTEN (host:port), COAAT_DATA_DIR, COAAT_FEES, COAAT_USD_PER_BNB.
    static ServiceConfig from_env();
    void set_listen(std::string_view host_port);
    FeeSchedule schedule() const;
};

/// HTTP facade over one Engine. Tokens are issued after a key-proof login
/// and live only in memory.
class Service {
public:
    Service(Engine& engine, ServiceConfig config);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Binds (port 0 picks a free one) and serves on a background thread.
    int start();
    // Binds and blocks until stop().
    void run();
    void stop();
    int port() const noexcept { return port_; }

private:
    struct Session {
        Address address;
        std::chrono::steady_clock::time_point expires;
    };

    void routes();
    int bind();
    Address authenticate(const std::string& authorization_header);
    std::string issue_challenge(const Address& address);
    std::string login(const Address& address, const std::string& nonce, const std::string& proof_hex);

    Engine& engine_;
    ServiceConfig config_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;

    std::mutex auth_mutex_;
    std::map<std::string, std::pair<Address, std::chrono::steady_clock::time_point>> challenges_;
    std::map<std::string, Session> sessions_;
};

}  // namespace coaat
