#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

#include "coaat/bytes.hpp"

namespace coaat {

/// Content identifier: SHA-256 of the stored bytes, rendered "cid:" + hex.
struct Cid {
    Hash32 digest{};

    static Cid of(ByteView content);
    static Cid parse(std::string_view text);
    std::string to_string() const;
    std::string hex() const { return to_hex(digest); }

    auto operator<=>(const Cid&) const = default;
};

class BlobBackend {
public:
    virtual ~BlobBackend() = default;
    virtual bool contains(const std::string& hex) const = 0;
    virtual std::optional<Bytes> read(const std::string& hex) const = 0;
    // Must publish atomically: readers see either nothing or the full blob.
    virtual void write(const std::string& hex, ByteView content) = 0;
};

/// Off-chain document store. Reads are public and always re-verify the
/// digest; writes are idempotent.
class ContentStore {
public:
    static constexpr std::size_t kDefaultMaxSize = 32u << 20;

    explicit ContentStore(std::unique_ptr<BlobBackend> backend,
                          std::size_t max_size = kDefaultMaxSize);

    static ContentStore in_memory(std::size_t max_size = kDefaultMaxSize);
    // Layout: <root>/<hex[0:2]>/<hex[2:4]>/<hex>, temp files under <root>/tmp.
    static ContentStore at_directory(const std::filesystem::path& root,
                                     std::size_t max_size = kDefaultMaxSize);

    Cid put(ByteView content);
    Bytes get(const Cid& cid) const;
    bool has(const Cid& cid) const;

    std::size_t max_size() const noexcept { return max_size_; }

private:
    std::unique_ptr<BlobBackend> backend_;
    std::size_t max_size_;
};

class MemoryBackend final : public BlobBackend {
public:
    bool contains(const std::string& hex) const override;
    std::optional<Bytes> read(const std::string& hex) const override;
    void write(const std::string& hex, ByteView content) override;

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, Bytes> blobs_;
};

class DirectoryBackend final : public BlobBackend {
public:
    explicit DirectoryBackend(std::filesystem::path root);

    std::filesystem::path path_for(const std::string& hex) const;

    bool contains(const std::string& hex) const override;
    std::optional<Bytes> read(const std::string& hex) const override;
    void write(const std::string& hex, ByteView content) override;

private:
    std::filesystem::path root_;
};

}  // namespace coaat
