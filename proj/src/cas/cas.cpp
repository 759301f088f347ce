#include <atomic>
#include <fstream>
#include <mutex>

#include "coaat/cas.hpp"
#include "coaat/crypto.hpp"

namespace coaat {

namespace fs = std::filesystem;

Cid Cid::of(ByteView content)
{
    return Cid{sha256(content)};
}

Cid Cid::parse(std::string_view text)
{
    if (!text.starts_with("cid:") || text.size() != 4 + 64)
        throw Error(Errc::MalformedInput, "cid must be cid: + 64 hex digits");
    for (char c : text.substr(4))
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')))
            throw Error(Errc::MalformedInput, "cid hex must be lowercase");
    return Cid{fixed_from_hex<32>(text.substr(4))};
}

std::string Cid::to_string() const
{
    return "cid:" + hex();
}

ContentStore::ContentStore(std::unique_ptr<BlobBackend> backend, std::size_t max_size)
    : backend_(std::move(backend)), max_size_(max_size)
{
}

ContentStore ContentStore::in_memory(std::size_t max_size)
{
    return ContentStore(std::make_unique<MemoryBackend>(), max_size);
}

ContentStore ContentStore::at_directory(const fs::path& root, std::size_t max_size)
{
    return ContentStore(std::make_unique<DirectoryBackend>(root), max_size);
}

Cid ContentStore::put(ByteView content)
{
    if (content.empty())
        throw Error(Errc::EmptyContent);
    if (content.size() > max_size_)
        throw Error(Errc::ContentTooLarge, std::to_string(content.size()) + " bytes");
    auto cid = Cid::of(content);
    auto hex = cid.hex();
    if (!backend_->contains(hex))
        backend_->write(hex, content);
    return cid;
}

Bytes ContentStore::get(const Cid& cid) const
{
    auto blob = backend_->read(cid.hex());
    if (!blob)
        throw Error(Errc::NotFound, cid.to_string());
    if (sha256(*blob) != cid.digest)
        throw Error(Errc::IntegrityViolation, cid.to_string());
    return std::move(*blob);
}

bool ContentStore::has(const Cid& cid) const
{
    return backend_->contains(cid.hex());
}

bool MemoryBackend::contains(const std::string& hex) const
{
    std::shared_lock lock(mutex_);
    return blobs_.contains(hex);
}

std::optional<Bytes> MemoryBackend::read(const std::string& hex) const
{
    std::shared_lock lock(mutex_);
    auto it = blobs_.find(hex);
    if (it == blobs_.end())
        return std::nullopt;
    return it->second;
}

void MemoryBackend::write(const std::string& hex, ByteView content)
{
    std::unique_lock lock(mutex_);
    blobs_.try_emplace(hex, content.begin(), content.end());
}

DirectoryBackend::DirectoryBackend(fs::path root) : root_(std::move(root))
{
    fs::create_directories(root_ / "tmp");
}

fs::path DirectoryBackend::path_for(const std::string& hex) const
{
    return root_ / hex.substr(0, 2) / hex.substr(2, 2) / hex;
}

bool DirectoryBackend::contains(const std::string& hex) const
{
    return fs::exists(path_for(hex));
}

std::optional<Bytes> DirectoryBackend::read(const std::string& hex) const
{
    std::ifstream in(path_for(hex), std::ios::binary);
    if (!in)
        return std::nullopt;
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void DirectoryBackend::write(const std::string& hex, ByteView content)
{
    static std::atomic<std::uint64_t> counter{0};
    auto target = path_for(hex);
    fs::create_directories(target.parent_path());
    auto tmp = root_ / "tmp" / (hex + "." + std::to_string(counter.fetch_add(1)));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(content.data()),
                  static_cast<std::streamsize>(content.size()));
        if (!out)
            throw Error(Errc::IoError, "cannot write " + tmp.string());
    }
    // Racing writers of identical content converge on the same bytes.
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(Errc::IoError, "cannot publish " + target.string());
    }
}

}  // namespace coaat
