#include <chrono>

#include "coaat/crypto.hpp"
#include "coaat/ledger.hpp"

namespace coaat {

namespace {

constexpr std::array<std::string_view, kAllTxKinds.size()> kKindNames{
    "Kickoff",       "AddCoaat", "AddUser",           "RegisterProperty",
    "CreateDossier", "AddFile",  "RequestValidation", "ValidateDossier",
};

}  // namespace

std::string_view to_string(TxKind kind) noexcept
{
    auto i = static_cast<std::size_t>(kind);
    return i < kKindNames.size() ? kKindNames[i] : "Unknown";
}

std::optional<TxKind> parse_tx_kind(std::string_view name) noexcept
{
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == name)
            return kAllTxKinds[i];
    return std::nullopt;
}

Clock system_clock()
{
    return [] {
        return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::seconds>(
                                              std::chrono::system_clock::now().time_since_epoch())
                                              .count());
    };
}

void Transaction::encode(Encoder& enc) const
{
    enc.u8(static_cast<std::uint8_t>(kind))
        .fixed(sender.bytes())
        .u64(nonce)
        .u64(timestamp)
        .bytes(payload);
}

Bytes Transaction::encode() const
{
    Encoder enc;
    encode(enc);
    return enc.take();
}

Transaction Transaction::decode(Decoder& dec)
{
    Transaction tx;
    auto kind = dec.u8();
    if (kind >= kAllTxKinds.size())
        throw Error(Errc::MalformedPayload, "unknown transaction kind");
    tx.kind = static_cast<TxKind>(kind);
    tx.sender = Address(dec.array<Address::kSize>());
    tx.nonce = dec.u64();
    tx.timestamp = dec.u64();
    tx.payload = dec.bytes();
    return tx;
}

Hash32 Transaction::hash() const
{
    return sha256(encode());
}

Hash32 Block::compute_hash() const
{
    Encoder enc;
    enc.u64(height).fixed(prev_hash).u32(static_cast<std::uint32_t>(txs.size()));
    for (const auto& tx : txs)
        enc.bytes(tx.encode());
    enc.fixed(state_root);
    return sha256(enc.data());
}

Bytes Block::encode() const
{
    Encoder enc;
    enc.u64(height).fixed(prev_hash).u32(static_cast<std::uint32_t>(txs.size()));
    for (const auto& tx : txs)
        enc.bytes(tx.encode());
    enc.fixed(state_root).fixed(block_hash);
    return enc.take();
}

Block Block::decode(ByteView data)
{
    Decoder dec(data);
    Block b;
    b.height = dec.u64();
    b.prev_hash = dec.array<32>();
    auto count = dec.u32();
    if (count > dec.remaining())
        throw Error(Errc::MalformedPayload, "transaction count exceeds record");
    for (std::uint32_t i = 0; i < count; ++i) {
        auto raw = dec.bytes();
        Decoder tx_dec(raw);
        b.txs.push_back(Transaction::decode(tx_dec));
        tx_dec.expect_done();
    }
    b.state_root = dec.array<32>();
    b.block_hash = dec.array<32>();
    dec.expect_done();
    return b;
}

AuditReport verify_blocks(std::span<const Block> blocks)
{
    AuditReport report;
    Hash32 expected_prev{};
    for (std::uint64_t h = 0; h < blocks.size(); ++h) {
        const auto& b = blocks[h];
        if (b.height != h || b.prev_hash != expected_prev || b.compute_hash() != b.block_hash) {
            report.ok = false;
            report.first_corrupt_height = h;
            return report;
        }
        expected_prev = b.block_hash;
        ++report.blocks_checked;
    }
    return report;
}

}  // namespace coaat
