#include "coaat/crypto.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

namespace coaat {

struct Sha256::Impl {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    ~Impl() { EVP_MD_CTX_free(ctx); }
};

Sha256::Sha256() : impl_(std::make_unique<Impl>())
{
    if (impl_->ctx == nullptr || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1)
        throw Error(Errc::IoError, "sha256 init failed");
}

Sha256::~Sha256() = default;

Sha256& Sha256::update(ByteView data)
{
    if (!data.empty() && EVP_DigestUpdate(impl_->ctx, data.data(), data.size()) != 1)
        throw Error(Errc::IoError, "sha256 update failed");
    return *this;
}

Hash32 Sha256::finish()
{
    Hash32 out{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(impl_->ctx, out.data(), &len) != 1 || len != out.size())
        throw Error(Errc::IoError, "sha256 final failed");
    return out;
}

Hash32 sha256(ByteView data)
{
    return Sha256{}.update(data).finish();
}

Hash32 hmac_sha256(ByteView key, ByteView message)
{
    Hash32 out{};
    unsigned int len = 0;
    static const std::uint8_t kEmpty = 0;
    const auto* msg = message.empty() ? &kEmpty : message.data();
    if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), msg, message.size(),
             out.data(), &len) == nullptr ||
        len != out.size())
        throw Error(Errc::IoError, "hmac failed");
    return out;
}

bool constant_time_equal(ByteView a, ByteView b) noexcept
{
    return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

void random_bytes(std::span<std::uint8_t> out)
{
    if (!out.empty() && RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
        throw Error(Errc::IoError, "RAND_bytes failed");
}

}  // namespace coaat
