#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "coaat/address.hpp"
#include "coaat/bytes.hpp"
#include "coaat/codec.hpp"
#include "coaat/decimal.hpp"

namespace coaat {

enum class TxKind : std::uint8_t {
    Kickoff = 0,
    AddCoaat = 1,
    AddUser = 2,
    RegisterProperty = 3,
    CreateDossier = 4,
    AddFile = 5,
    RequestValidation = 6,
    ValidateDossier = 7,
};

inline constexpr std::array kAllTxKinds{
    TxKind::Kickoff,       TxKind::AddCoaat, TxKind::AddUser,           TxKind::RegisterProperty,
    TxKind::CreateDossier, TxKind::AddFile,  TxKind::RequestValidation, TxKind::ValidateDossier,
};

std::string_view to_string(TxKind kind) noexcept;
std::optional<TxKind> parse_tx_kind(std::string_view name) noexcept;

// Seconds since epoch. Injectable so tests and replays are deterministic.
using Clock = std::function<std::uint64_t()>;
Clock system_clock();

struct Transaction {
    TxKind kind = TxKind::Kickoff;
    Address sender;
    Bytes payload;
    std::uint64_t nonce = 0;
    std::uint64_t timestamp = 0;

    void encode(Encoder& enc) const;
    Bytes encode() const;
    static Transaction decode(Decoder& dec);
    Hash32 hash() const;

    bool operator==(const Transaction&) const = default;
};

struct Block {
    std::uint64_t height = 0;
    Hash32 prev_hash{};
    std::vector<Transaction> txs;
    Hash32 state_root{};
    Hash32 block_hash{};

    Hash32 compute_hash() const;
    Bytes encode() const;
    static Block decode(ByteView data);
};

class FeeSchedule {
public:
    FeeSchedule();

    // Fees measured on the BNB testnet for each transaction type; kinds
    // without a measured fee (RequestValidation, ValidateDossier) are 0.
    static FeeSchedule standard();
    static FeeSchedule zero();

    // {"usd_per_bnb": "302.80", "fees": {"AddFile": "0.00304687", ...}}.
    // Kinds missing from "fees" keep the standard default.
    static FeeSchedule from_json(std::string_view json);
    static FeeSchedule load(const std::filesystem::path& file);
    std::string to_json() const;

    Decimal fee(TxKind kind) const;
    Decimal fee_usd(TxKind kind) const;
    const Decimal& usd_per_bnb() const noexcept { return usd_per_bnb_; }

    void set_fee(TxKind kind, Decimal fee);
    void set_usd_per_bnb(Decimal rate) { usd_per_bnb_ = rate; }

private:
    std::array<Decimal, kAllTxKinds.size()> per_kind_{};
    Decimal usd_per_bnb_;
};

using EventId = std::uint64_t;

struct Receipt {
    Hash32 tx_hash{};
    std::uint64_t block_height = 0;
    Decimal fee_bnb;
    Decimal fee_usd;
    std::vector<EventId> emitted_events;
};

struct AuditReport {
    bool ok = true;
    std::optional<std::uint64_t> first_corrupt_height;
    std::uint64_t blocks_checked = 0;
};

struct CostLine {
    std::string label;
    std::optional<TxKind> kind;  // empty for the read row
    std::uint64_t count = 0;
    Decimal unit_bnb;
    Decimal unit_usd;
    Decimal total_bnb;
    Decimal total_usd;
};

struct CostReport {
    std::vector<CostLine> lines;
    Decimal total_bnb;
    Decimal total_usd;
};

// Per-kind sums are count x unit fee; USD totals sum the per-transaction
// rounded USD fees so they agree with the receipts.
CostReport total_cost(std::span<const Transaction> tx_log, const FeeSchedule& schedule);

std::string_view cost_label(TxKind kind) noexcept;
inline constexpr std::string_view kReadLabel = "Read or check a dossier";

// Checks both block invariants over an in-memory chain.
AuditReport verify_blocks(std::span<const Block> blocks);

/// The deterministic state machine the ledger orders transactions for.
/// apply() either commits the whole transaction or throws coaat::Error and
/// leaves the state untouched.
class Application {
public:
    virtual ~Application() = default;

    virtual std::vector<EventId> apply(const Transaction& tx, const Hash32& tx_hash) = 0;
    virtual Bytes snapshot() const = 0;
    virtual void restore(ByteView snapshot) = 0;
};

/// Append-only file of length-prefixed block records.
class ChainFile {
public:
    explicit ChainFile(std::filesystem::path path);

    const std::filesystem::path& path() const noexcept { return path_; }

    // Throws CorruptChain (detail carries the height) on framing errors.
    std::vector<Block> load() const;
    void append(const Block& block);

    // Framing and hash-chain audit of the file as stored.
    static AuditReport audit(const std::filesystem::path& path);

private:
    std::filesystem::path path_;
};

struct TxLocation {
    std::uint64_t height = 0;
    Transaction tx;
};

/// Single-sequencer blockchain: one block per accepted transaction.
///
/// Submissions are serialized behind an exclusive lock; queries take a shared
/// lock and only ever observe fully committed blocks.
class Ledger {
public:
    struct Options {
        FeeSchedule schedule = FeeSchedule::standard();
        Clock clock = system_clock();
        std::optional<std::filesystem::path> data_dir;
        std::uint64_t snapshot_interval = 64;
    };

    // Builds genesis, or recovers from data_dir (latest valid snapshot plus
    // replay of the remaining blocks). The application must be fresh.
    Ledger(Application& app, Options options);

    Ledger(const Ledger&) = delete;
    Ledger& operator=(const Ledger&) = delete;

    // Assigns the timestamp, applies, seals a block. Contract rejections are
    // reported as RejectedByContract and leave the chain untouched.
    Receipt submit_transaction(Transaction tx);

    std::uint64_t next_nonce(const Address& sender) const;
    std::uint64_t height() const;
    Hash32 state_root() const;
    Block block(std::uint64_t height) const;
    std::vector<Block> blocks() const;
    std::vector<Transaction> tx_log() const;
    std::optional<TxLocation> find_tx(const Hash32& tx_hash) const;

    AuditReport verify_chain() const;
    CostReport session_cost() const;
    Decimal fees_charged_bnb() const;
    const FeeSchedule& schedule() const noexcept { return options_.schedule; }

    // Re-applies a log on `fresh` (with the recorded timestamps) and returns
    // the resulting state root. Throws ReplayDivergence if any tx is rejected.
    static Hash32 replay(std::span<const Transaction> tx_log, const FeeSchedule& schedule,
                         Application& fresh);

private:
    Hash32 compute_state_root() const;
    Receipt commit(Transaction tx);
    void recover(const std::filesystem::path& dir);
    void write_snapshot(const Block& block) const;
    bool try_restore_snapshot(const std::filesystem::path& file, const std::vector<Block>& chain,
                              std::uint64_t& restored_height);

    Application& app_;
    Options options_;
    std::optional<ChainFile> file_;

    mutable std::shared_mutex mutex_;
    std::vector<Block> blocks_;
    std::map<Address, std::uint64_t> nonces_;  // last used nonce per sender
    std::unordered_map<std::string, std::pair<std::uint64_t, std::size_t>> tx_index_;
    Decimal fees_charged_;
};

// One JSON object per block: height, block_hash, kind, sender, fee_bnb.
// Genesis is emitted with kind "Genesis" and no sender.
std::string export_chain(std::span<const Block> blocks, const FeeSchedule& schedule);

}  // namespace coaat
