#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <shared_mutex>
#include <span>
#include <string>

#include "coaat/address.hpp"
#include "coaat/bytes.hpp"

namespace coaat {

inline constexpr std::string_view kCrockfordAlphabet = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";

/// Secure Verification Code: 14 random Crockford base32 characters (70 bits)
/// followed by a 2-character checksum.
///
/// The checksum is sum((i + 1) * value(c_i)) mod 1019 over the 14 payload
/// characters, written as two base32 digits. Any single substitution moves
/// the sum by at most 14 * 31 < 1019, so every one-character corruption is
/// caught, as is every adjacent transposition of distinct characters.
class Svc {
public:
    static constexpr std::size_t kLength = 16;
    static constexpr std::size_t kPayloadLength = 14;

    Svc() = default;

    // Lenient on input: lowercase, I/L (-> 1) and O (-> 0) are normalized
    // before the checksum is checked. Throws MalformedSvc.
    static Svc parse(std::string_view text);

    // Strict: the canonical 16-character form only.
    static bool checksum_valid(std::string_view code) noexcept;
    static std::string checksum(std::string_view payload);

    const std::string& str() const noexcept { return code_; }

    auto operator<=>(const Svc&) const = default;

private:
    explicit Svc(std::string code) : code_(std::move(code)) {}

    std::string code_;
};

class EntropySource {
public:
    virtual ~EntropySource() = default;
    virtual void fill(std::span<std::uint8_t> out) = 0;
};

class SystemEntropy final : public EntropySource {
public:
    void fill(std::span<std::uint8_t> out) override;
};

// Reproducible entropy for tests and scenario runs.
class SeededEntropy final : public EntropySource {
public:
    explicit SeededEntropy(std::uint64_t seed) : rng_(seed) {}
    void fill(std::span<std::uint8_t> out) override;

private:
    std::mt19937_64 rng_;
};

Svc generate_svc(EntropySource& entropy);

// Marker line grammar: "SVC: " + 16 characters + "\n".
std::string svc_marker_line(const Svc& svc);

// Appends the marker line (after a separating newline when the content does
// not already end in one). Throws MarkerAlreadyPresent.
Bytes embed_svc(ByteView content, const Svc& svc);

// Throws MissingSvcMarker when no marker line exists and MalformedSvc when
// there is more than one or it does not follow the grammar.
Svc extract_svc(ByteView body);

bool has_svc_marker(ByteView body) noexcept;

// Removes every marker line; used when a reviewer re-issues a document.
Bytes strip_svc(ByteView body);

struct SigningKey {
    std::array<std::uint8_t, 32> bytes{};

    static SigningKey generate(EntropySource& entropy);
    static SigningKey parse(std::string_view hex);
    std::string hex() const { return to_hex(bytes); }

    bool operator==(const SigningKey&) const = default;
};

Address derive_address(const SigningKey& key);

struct SignedDocument {
    Bytes body;
    Svc embedded_svc;
    Address signer;
    Hash32 signature{};
};

Hash32 signature_tag(ByteView body, const Address& signer, const SigningKey& key);

// Throws MissingSvcMarker / MalformedSvc if the body lacks exactly one marker.
SignedDocument sign(Bytes body, const Address& signer, const SigningKey& key);

Hash32 key_proof(const SigningKey& key, std::string_view challenge);

/// Per-address signing keys; never part of chain state. Optionally backed by
/// an append-only text file of "<address> <key hex>" lines.
class KeyRegistry {
public:
    KeyRegistry() = default;
    explicit KeyRegistry(std::filesystem::path file);

    // Throws AddressAlreadyRegistered.
    void register_key(const Address& address, const SigningKey& key);
    std::optional<SigningKey> find(const Address& address) const;
    std::size_t size() const;

private:
    mutable std::shared_mutex mutex_;
    std::map<Address, SigningKey> keys_;
    std::optional<std::filesystem::path> file_;
};

// Returns the signer on success. Throws UnknownSigner or SignatureInvalid.
Address verify(const SignedDocument& doc, const KeyRegistry& registry);

}  // namespace coaat
