#include <fstream>
#include <mutex>
#include <sstream>

#include "coaat/codec.hpp"
#include "coaat/crypto.hpp"
#include "coaat/documents.hpp"

namespace coaat {

SigningKey SigningKey::generate(EntropySource& entropy)
{
    SigningKey key;
    entropy.fill(key.bytes);
    return key;
}

SigningKey SigningKey::parse(std::string_view hex)
{
    return SigningKey{fixed_from_hex<32>(hex)};
}

Address derive_address(const SigningKey& key)
{
    auto digest = Sha256{}.update("coaat/address/v1").update(key.bytes).finish();
    std::array<std::uint8_t, Address::kSize> out{};
    std::copy(digest.end() - Address::kSize, digest.end(), out.begin());
    return Address(out);
}

Hash32 signature_tag(ByteView body, const Address& signer, const SigningKey& key)
{
    Encoder enc;
    enc.str("coaat/sign/v1").bytes(body).fixed(signer.bytes());
    return hmac_sha256(key.bytes, enc.data());
}

SignedDocument sign(Bytes body, const Address& signer, const SigningKey& key)
{
    auto svc = extract_svc(body);
    auto tag = signature_tag(body, signer, key);
    return SignedDocument{std::move(body), std::move(svc), signer, tag};
}

Hash32 key_proof(const SigningKey& key, std::string_view challenge)
{
    Encoder enc;
    enc.str("coaat/login/v1").str(challenge);
    return hmac_sha256(key.bytes, enc.data());
}

KeyRegistry::KeyRegistry(std::filesystem::path file) : file_(std::move(file))
{
    std::ifstream in(*file_);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream fields(line);
        std::string addr, key;
        fields >> addr >> key;
        keys_[Address::parse(addr)] = SigningKey::parse(key);
    }
}

void KeyRegistry::register_key(const Address& address, const SigningKey& key)
{
    std::unique_lock lock(mutex_);
    if (keys_.contains(address))
        throw Error(Errc::AddressAlreadyRegistered, address.to_string());
    if (file_) {
        std::ofstream out(*file_, std::ios::app);
        out << address.to_string() << ' ' << key.hex() << '\n';
        if (!out)
            throw Error(Errc::IoError, "cannot persist key for " + address.to_string());
    }
    keys_.emplace(address, key);
}

std::optional<SigningKey> KeyRegistry::find(const Address& address) const
{
    std::shared_lock lock(mutex_);
    auto it = keys_.find(address);
    if (it == keys_.end())
        return std::nullopt;
    return it->second;
}

std::size_t KeyRegistry::size() const
{
    std::shared_lock lock(mutex_);
    return keys_.size();
}

Address verify(const SignedDocument& doc, const KeyRegistry& registry)
{
    auto key = registry.find(doc.signer);
    if (!key)
        throw Error(Errc::UnknownSigner, doc.signer.to_string());
    auto expected = signature_tag(doc.body, doc.signer, *key);
    if (!constant_time_equal(expected, doc.signature))
        throw Error(Errc::SignatureInvalid);
    try {
        if (extract_svc(doc.body) != doc.embedded_svc)
            throw Error(Errc::SignatureInvalid, "embedded SVC does not match the body");
    } catch (const Error& e) {
        if (e.code() == Errc::SignatureInvalid)
            throw;
        throw Error(Errc::SignatureInvalid, e.what());
    }
    return doc.signer;
}

}  // namespace coaat
