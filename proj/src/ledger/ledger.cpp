#include <algorithm>
#include <fstream>
#include <mutex>

#include "coaat/crypto.hpp"
#include "coaat/ledger.hpp"
#include "json.hpp"

namespace coaat {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kStateDomain = "coaat/state/v1";
constexpr std::uint32_t kMaxRecord = 256u << 20;

void encode_nonces(Encoder& enc, const std::map<Address, std::uint64_t>& nonces)
{
    enc.u32(static_cast<std::uint32_t>(nonces.size()));
    for (const auto& [addr, nonce] : nonces)
        enc.fixed(addr.bytes()).u64(nonce);
}

std::map<Address, std::uint64_t> decode_nonces(Decoder& dec)
{
    std::map<Address, std::uint64_t> out;
    auto n = dec.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        Address a(dec.array<Address::kSize>());
        out[a] = dec.u64();
    }
    return out;
}

Hash32 root_of(const std::map<Address, std::uint64_t>& nonces, const Application& app)
{
    Encoder enc;
    enc.str(kStateDomain);
    encode_nonces(enc, nonces);
    enc.bytes(app.snapshot());
    return sha256(enc.data());
}

void check_nonce(const std::map<Address, std::uint64_t>& nonces, const Transaction& tx)
{
    if (auto it = nonces.find(tx.sender); it != nonces.end() && tx.nonce <= it->second)
        throw Error(Errc::DuplicateNonce, tx.sender.to_string() + " nonce " + std::to_string(tx.nonce));
}

void check_well_formed(const Transaction& tx)
{
    if (tx.kind != TxKind::Kickoff && tx.payload.empty())
        throw Error(Errc::MalformedPayload, "empty payload");
}

std::string snapshot_name(std::uint64_t height)
{
    auto digits = std::to_string(height);
    return std::string(20 - digits.size(), '0') + digits + ".snap";
}

Bytes read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoError, "cannot open " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Splits a chain file into records. Returns the parsed prefix; sets
// `bad_height` to the first record that fails framing or decoding.
std::vector<Block> parse_records(ByteView data, std::optional<std::uint64_t>& bad_height)
{
    std::vector<Block> blocks;
    std::size_t pos = 0;
    while (pos < data.size()) {
        try {
            Decoder frame(data.subspan(pos));
            auto len = frame.u32();
            if (len > kMaxRecord)
                throw Error(Errc::MalformedPayload, "oversized record");
            auto body = frame.fixed(len);
            blocks.push_back(Block::decode(body));
            pos += 4 + len;
        } catch (const Error&) {
            bad_height = blocks.size();
            break;
        }
    }
    return blocks;
}

}  // namespace

ChainFile::ChainFile(fs::path path) : path_(std::move(path)) {}

std::vector<Block> ChainFile::load() const
{
    if (!fs::exists(path_))
        return {};
    auto data = read_file(path_);
    std::optional<std::uint64_t> bad;
    auto blocks = parse_records(data, bad);
    if (bad)
        throw Error(Errc::CorruptChain, "unreadable record at height " + std::to_string(*bad));
    return blocks;
}

void ChainFile::append(const Block& block)
{
    auto body = block.encode();
    Encoder frame;
    frame.u32(static_cast<std::uint32_t>(body.size())).fixed(body);
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    out.write(reinterpret_cast<const char*>(frame.data().data()),
              static_cast<std::streamsize>(frame.data().size()));
    out.flush();
    if (!out)
        throw Error(Errc::IoError, "append to " + path_.string() + " failed");
}

AuditReport ChainFile::audit(const fs::path& path)
{
    auto data = read_file(path);
    std::optional<std::uint64_t> bad;
    auto blocks = parse_records(data, bad);
    auto report = verify_blocks(blocks);
    if (bad && report.ok) {
        report.ok = false;
        report.first_corrupt_height = *bad;
    }
    if (report.ok && blocks.empty()) {
        // A chain always contains genesis.
        report.ok = false;
        report.first_corrupt_height = 0;
    }
    return report;
}

Ledger::Ledger(Application& app, Options options) : app_(app), options_(std::move(options))
{
    if (options_.data_dir) {
        recover(*options_.data_dir);
        return;
    }
    Block genesis;
    genesis.state_root = compute_state_root();
    genesis.block_hash = genesis.compute_hash();
    blocks_.push_back(std::move(genesis));
}

Hash32 Ledger::compute_state_root() const
{
    return root_of(nonces_, app_);
}

void Ledger::recover(const fs::path& dir)
{
    fs::create_directories(dir / "snapshots");
    file_.emplace(dir / "chain.bin");
    auto chain = file_->load();
    if (chain.empty()) {
        Block genesis;
        genesis.state_root = compute_state_root();
        genesis.block_hash = genesis.compute_hash();
        file_->append(genesis);
        blocks_.push_back(std::move(genesis));
        return;
    }
    if (auto report = verify_blocks(chain); !report.ok)
        throw Error(Errc::CorruptChain,
                    "hash chain broken at height " + std::to_string(*report.first_corrupt_height));

    const auto genesis_state = app_.snapshot();
    std::uint64_t start = 0;
    std::vector<fs::path> snaps;
    for (const auto& entry : fs::directory_iterator(dir / "snapshots"))
        if (entry.path().extension() == ".snap")
            snaps.push_back(entry.path());
    std::sort(snaps.rbegin(), snaps.rend());
    bool restored = false;
    for (const auto& snap : snaps) {
        if (try_restore_snapshot(snap, chain, start)) {
            restored = true;
            break;
        }
    }
    if (!restored) {
        app_.restore(genesis_state);
        nonces_.clear();
        start = 0;
        if (compute_state_root() != chain[0].state_root)
            throw Error(Errc::CorruptChain, "genesis state root mismatch");
    }

    for (std::uint64_t h = start + 1; h < chain.size(); ++h) {
        for (const auto& tx : chain[h].txs) {
            try {
                check_nonce(nonces_, tx);
                app_.apply(tx, tx.hash());
            } catch (const Error& e) {
                throw Error(Errc::CorruptChain,
                            "block " + std::to_string(h) + " no longer applies: " + e.what());
            }
            nonces_[tx.sender] = tx.nonce;
        }
        if (compute_state_root() != chain[h].state_root)
            throw Error(Errc::CorruptChain, "state root mismatch at height " + std::to_string(h));
    }

    blocks_ = std::move(chain);
    for (std::uint64_t h = 0; h < blocks_.size(); ++h) {
        for (std::size_t i = 0; i < blocks_[h].txs.size(); ++i) {
            const auto& tx = blocks_[h].txs[i];
            tx_index_[to_hex(tx.hash())] = {h, i};
            fees_charged_ += options_.schedule.fee(tx.kind);
        }
    }
}

bool Ledger::try_restore_snapshot(const fs::path& file, const std::vector<Block>& chain,
                                  std::uint64_t& restored_height)
{
    try {
        auto data = read_file(file);
        Decoder dec(data);
        auto height = dec.u64();
        auto root = dec.array<32>();
        auto nonces = decode_nonces(dec);
        auto app_state = dec.bytes();
        dec.expect_done();
        if (height >= chain.size() || chain[height].state_root != root)
            return false;
        app_.restore(app_state);
        nonces_ = std::move(nonces);
        if (compute_state_root() != root)
            return false;
        restored_height = height;
        return true;
    } catch (const Error&) {
        return false;
    }
}

void Ledger::write_snapshot(const Block& block) const
{
    Encoder enc;
    enc.u64(block.height).fixed(block.state_root);
    encode_nonces(enc, nonces_);
    enc.bytes(app_.snapshot());
    auto dir = *options_.data_dir / "snapshots";
    auto tmp = dir / (snapshot_name(block.height) + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(enc.data().data()),
                  static_cast<std::streamsize>(enc.data().size()));
        if (!out)
            throw Error(Errc::IoError, "snapshot write failed");
    }
    fs::rename(tmp, dir / snapshot_name(block.height));
}

Receipt Ledger::submit_transaction(Transaction tx)
{
    std::unique_lock lock(mutex_);
    tx.timestamp = options_.clock();
    return commit(std::move(tx));
}

Receipt Ledger::commit(Transaction tx)
{
    check_well_formed(tx);
    check_nonce(nonces_, tx);

    const auto tx_hash = tx.hash();
    std::vector<EventId> events;
    try {
        events = app_.apply(tx, tx_hash);
    } catch (const Error& e) {
        throw Error::rejected_by_contract(e);
    }
    nonces_[tx.sender] = tx.nonce;

    Block block;
    block.height = blocks_.size();
    block.prev_hash = blocks_.back().block_hash;
    block.txs.push_back(tx);
    block.state_root = compute_state_root();
    block.block_hash = block.compute_hash();

    if (file_) {
        file_->append(block);
        if (options_.snapshot_interval > 0 && block.height % options_.snapshot_interval == 0)
            write_snapshot(block);
    }

    Receipt receipt;
    receipt.tx_hash = tx_hash;
    receipt.block_height = block.height;
    receipt.fee_bnb = options_.schedule.fee(tx.kind);
    receipt.fee_usd = options_.schedule.fee_usd(tx.kind);
    receipt.emitted_events = std::move(events);

    tx_index_[to_hex(tx_hash)] = {block.height, 0};
    fees_charged_ += receipt.fee_bnb;
    blocks_.push_back(std::move(block));
    return receipt;
}

std::uint64_t Ledger::next_nonce(const Address& sender) const
{
    std::shared_lock lock(mutex_);
    auto it = nonces_.find(sender);
    return it == nonces_.end() ? 0 : it->second + 1;
}

std::uint64_t Ledger::height() const
{
    std::shared_lock lock(mutex_);
    return blocks_.size() - 1;
}

Hash32 Ledger::state_root() const
{
    std::shared_lock lock(mutex_);
    return blocks_.back().state_root;
}

Block Ledger::block(std::uint64_t height) const
{
    std::shared_lock lock(mutex_);
    if (height >= blocks_.size())
        throw Error(Errc::NotFound, "no block at height " + std::to_string(height));
    return blocks_[height];
}

std::vector<Block> Ledger::blocks() const
{
    std::shared_lock lock(mutex_);
    return blocks_;
}

std::vector<Transaction> Ledger::tx_log() const
{
    std::shared_lock lock(mutex_);
    std::vector<Transaction> log;
    for (const auto& b : blocks_)
        log.insert(log.end(), b.txs.begin(), b.txs.end());
    return log;
}

std::optional<TxLocation> Ledger::find_tx(const Hash32& tx_hash) const
{
    std::shared_lock lock(mutex_);
    auto it = tx_index_.find(to_hex(tx_hash));
    if (it == tx_index_.end())
        return std::nullopt;
    const auto& [height, i] = it->second;
    return TxLocation{height, blocks_[height].txs[i]};
}

AuditReport Ledger::verify_chain() const
{
    std::shared_lock lock(mutex_);
    return verify_blocks(blocks_);
}

CostReport Ledger::session_cost() const
{
    return total_cost(tx_log(), options_.schedule);
}

Decimal Ledger::fees_charged_bnb() const
{
    std::shared_lock lock(mutex_);
    return fees_charged_;
}

Hash32 Ledger::replay(std::span<const Transaction> tx_log, const FeeSchedule& schedule,
                      Application& fresh)
{
    (void)schedule;  // fees do not feed the state root
    std::map<Address, std::uint64_t> nonces;
    for (std::size_t i = 0; i < tx_log.size(); ++i) {
        const auto& tx = tx_log[i];
        try {
            check_well_formed(tx);
            check_nonce(nonces, tx);
            fresh.apply(tx, tx.hash());
        } catch (const Error& e) {
            throw Error(Errc::ReplayDivergence,
                        "tx " + std::to_string(i) + " rejected on replay: " + e.what());
        }
        nonces[tx.sender] = tx.nonce;
    }
    return root_of(nonces, fresh);
}

std::string export_chain(std::span<const Block> blocks, const FeeSchedule& schedule)
{
    std::string out;
    for (const auto& b : blocks) {
        if (b.txs.empty()) {
            nlohmann::ordered_json line{
                {"height", b.height},
                {"block_hash", to_hex(b.block_hash)},
                {"kind", "Genesis"},
                {"sender", nullptr},
                {"fee_bnb", Decimal{}.to_string()},
            };
            out += line.dump() + "\n";
            continue;
        }
        for (const auto& tx : b.txs) {
            nlohmann::ordered_json line{
                {"height", b.height},
                {"block_hash", to_hex(b.block_hash)},
                {"kind", std::string(to_string(tx.kind))},
                {"sender", tx.sender.to_string()},
                {"fee_bnb", schedule.fee(tx.kind).to_string()},
            };
            out += line.dump() + "\n";
        }
    }
    return out;
}

}  // namespace coaat
