#pragma once

#include <string>
#include <vector>

#include "coaat/codec.hpp"
#include "coaat/ledger.hpp"

namespace coaat::test {

// Appends payload strings; a payload of "reject" is refused.
class ToyApp : public Application {
public:
    std::vector<EventId> apply(const Transaction& tx, const Hash32&) override
    {
        auto text = to_string(tx.payload);
        if (text == "reject")
            throw Error(Errc::Unauthorized, "toy rejection");
        entries.push_back(text);
        return {entries.size()};
    }

    Bytes snapshot() const override
    {
        Encoder enc;
        enc.u32(static_cast<std::uint32_t>(entries.size()));
        for (const auto& e : entries)
            enc.str(e);
        return enc.take();
    }

    void restore(ByteView snap) override
    {
        Decoder dec(snap);
        std::vector<std::string> out(dec.u32());
        for (auto& e : out)
            e = dec.str();
        dec.expect_done();
        entries = std::move(out);
    }

    std::vector<std::string> entries;
};

inline Transaction toy_tx(TxKind kind, std::uint8_t who, std::uint64_t nonce, std::string payload)
{
    std::array<std::uint8_t, Address::kSize> raw{};
    raw.back() = who;
    Transaction tx;
    tx.kind = kind;
    tx.sender = Address(raw);
    tx.nonce = nonce;
    tx.payload = to_bytes(payload);
    return tx;
}

}  // namespace coaat::test
