#pragma once

#include <memory>
#include <span>

#include "coaat/bytes.hpp"

namespace coaat {

Hash32 sha256(ByteView data);
inline Hash32 sha256(std::string_view data) { return sha256(as_bytes(data)); }

/// Incremental SHA-256 for hashing multi-part inputs without concatenating.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& update(ByteView data);
    Sha256& update(std::string_view data) { return update(as_bytes(data)); }
    Hash32 finish();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Hash32 hmac_sha256(ByteView key, ByteView message);

bool constant_time_equal(ByteView a, ByteView b) noexcept;

// OS entropy; throws IoError if the generator is unavailable.
void random_bytes(std::span<std::uint8_t> out);

}  // namespace coaat
