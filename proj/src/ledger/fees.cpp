#include <fstream>
#include <sstream>

#include "coaat/ledger.hpp"
#include "json.hpp"

namespace coaat {

namespace {

std::size_t index(TxKind kind)
{
    return static_cast<std::size_t>(kind);
}

// Shortest rendering with at least two fractional digits.
std::string render_rate(const Decimal& d)
{
    int places = 2;
    while (places < Decimal::kScale && d.rounded(places) != d)
        ++places;
    return d.to_string(places);
}

}  // namespace

FeeSchedule::FeeSchedule() : usd_per_bnb_(Decimal::parse("302.80")) {}

FeeSchedule FeeSchedule::standard()
{
    FeeSchedule s;
    s.set_fee(TxKind::Kickoff, Decimal::parse("0.05250531"));
    s.set_fee(TxKind::AddCoaat, Decimal::parse("0.00238626"));
    s.set_fee(TxKind::AddUser, Decimal::parse("0.00177261"));
    s.set_fee(TxKind::RegisterProperty, Decimal::parse("0.03027519"));
    s.set_fee(TxKind::CreateDossier, Decimal::parse("0.00409118"));
    s.set_fee(TxKind::AddFile, Decimal::parse("0.00304687"));
    return s;
}

FeeSchedule FeeSchedule::zero()
{
    return FeeSchedule{};
}

FeeSchedule FeeSchedule::from_json(std::string_view text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::MalformedInput, std::string("fee schedule: ") + e.what());
    }
    if (!doc.is_object())
        throw Error(Errc::MalformedInput, "fee schedule must be a JSON object");

    auto s = standard();
    if (auto it = doc.find("usd_per_bnb"); it != doc.end()) {
        if (!it->is_string())
            throw Error(Errc::MalformedInput, "usd_per_bnb must be a decimal string");
        s.set_usd_per_bnb(Decimal::parse(it->get<std::string>()));
    }
    if (auto it = doc.find("fees"); it != doc.end()) {
        if (!it->is_object())
            throw Error(Errc::MalformedInput, "fees must be an object");
        for (const auto& [name, value] : it->items()) {
            auto kind = parse_tx_kind(name);
            if (!kind)
                throw Error(Errc::MalformedInput, "unknown transaction kind '" + name + "'");
            if (!value.is_string())
                throw Error(Errc::MalformedInput, "fee for " + name + " must be a decimal string");
            s.set_fee(*kind, Decimal::parse(value.get<std::string>()));
        }
    }
    return s;
}

FeeSchedule FeeSchedule::load(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw Error(Errc::IoError, "cannot open fee schedule " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string FeeSchedule::to_json() const
{
    nlohmann::ordered_json doc;
    doc["usd_per_bnb"] = render_rate(usd_per_bnb_);
    for (auto kind : kAllTxKinds)
        doc["fees"][std::string(to_string(kind))] = fee(kind).to_string();
    return doc.dump(2);
}

Decimal FeeSchedule::fee(TxKind kind) const
{
    return per_kind_.at(index(kind));
}

Decimal FeeSchedule::fee_usd(TxKind kind) const
{
    return Decimal::mul_round(fee(kind), usd_per_bnb_, 2);
}

void FeeSchedule::set_fee(TxKind kind, Decimal fee)
{
    per_kind_.at(index(kind)) = fee;
}

std::string_view cost_label(TxKind kind) noexcept
{
    switch (kind) {
    case TxKind::Kickoff:
        return "Smart contract factory deployment";
    case TxKind::AddCoaat:
        return "Add COAAT (Role 1)";
    case TxKind::AddUser:
        return "Add user (Role 2, 3)";
    case TxKind::RegisterProperty:
        return "Add new property";
    case TxKind::CreateDossier:
        return "Add new dossier";
    case TxKind::AddFile:
        return "Add file to dossier";
    case TxKind::RequestValidation:
        return "Request dossier validation";
    case TxKind::ValidateDossier:
        return "Validate or reject dossier";
    }
    return "Unknown";
}

CostReport total_cost(std::span<const Transaction> tx_log, const FeeSchedule& schedule)
{
    std::array<std::uint64_t, kAllTxKinds.size()> counts{};
    for (const auto& tx : tx_log)
        ++counts.at(index(tx.kind));

    CostReport report;
    for (auto kind : kAllTxKinds) {
        CostLine line;
        line.label = std::string(cost_label(kind));
        line.kind = kind;
        line.count = counts[index(kind)];
        line.unit_bnb = schedule.fee(kind);
        line.unit_usd = schedule.fee_usd(kind);
        line.total_bnb = line.unit_bnb * line.count;
        line.total_usd = line.unit_usd * line.count;
        report.total_bnb += line.total_bnb;
        report.total_usd += line.total_usd;
        report.lines.push_back(std::move(line));
    }
    CostLine read;
    read.label = std::string(kReadLabel);
    report.lines.push_back(std::move(read));
    return report;
}

}  // namespace coaat
