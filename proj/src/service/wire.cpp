#include <sstream>

#include "wire.hpp"

namespace coaat::wire {

namespace {

json address_or_null(const Address& a)
{
    return a.is_zero() ? json(nullptr) : json(a.to_string());
}

}  // namespace

json to_json(const Receipt& r, const FeeSchedule&)
{
    return {
        {"tx_hash", to_hex(r.tx_hash)},
        {"block_height", r.block_height},
        {"fee_bnb", r.fee_bnb.to_string()},
        {"fee_usd", r.fee_usd.to_string(2)},
        {"events", r.emitted_events},
    };
}

json to_json(const UserRecord& u)
{
    return {
        {"address", u.address.to_string()},
        {"role", static_cast<int>(u.role)},
        {"role_name", to_string(u.role)},
        {"coaat_id", u.coaat_id},
        {"name", u.name},
        {"registered_by", address_or_null(u.registered_by)},
    };
}

json to_json(const Property& p)
{
    json ids = json::array();
    for (const auto& d : p.dossiers)
        ids.push_back(d.id.to_string());
    return {
        {"cadastral_ref", p.cadastral_ref},
        {"cadastral_data", p.cadastral_data},
        {"contract_id", p.contract_id.to_string()},
        {"coaat", p.coaat},
        {"registered_by", p.registered_by.to_string()},
        {"dossiers", ids},
    };
}

json to_json(const DocumentRecord& d)
{
    return {
        {"svc", d.svc.str()},
        {"cid", d.cid.to_string()},
        {"version", to_string(d.version)},
        {"uploader", d.uploader.to_string()},
        {"tx_hash", to_hex(d.tx_hash)},
        {"timestamp", d.timestamp},
        {"signature", to_hex(d.signature)},
        {"reviews", d.reviews ? json(*d.reviews) : json(nullptr)},
    };
}

json to_json(const Dossier& d)
{
    json docs = json::array();
    for (const auto& r : d.documents)
        docs.push_back(to_json(r));
    return {
        {"id", d.id.to_string()},
        {"status", to_string(d.status)},
        {"creator", d.creator.to_string()},
        {"metadata", d.metadata},
        {"created_at", d.created_at},
        {"decided_at", d.decided_at},
        {"decided_by", address_or_null(d.decided_by)},
        {"documents", docs},
    };
}

json to_json(const DossierSummary& s)
{
    json out{
        {"id", s.id.to_string()},
        {"status", to_string(s.status)},
        {"creator", s.creator.to_string()},
        {"doc_count", s.doc_count},
    };
    if (s.documents) {
        json docs = json::array();
        for (const auto& r : *s.documents)
            docs.push_back(to_json(r));
        out["documents"] = docs;
    }
    return out;
}

json to_json(const Event& e)
{
    return {
        {"id", e.id},
        {"kind", to_string(e.kind)},
        {"dossier", e.dossier.to_string()},
        {"audience", static_cast<int>(e.audience)},
        {"status", to_string(e.status)},
        {"coaat", e.coaat},
        {"timestamp", e.timestamp},
    };
}

json to_json(const CostReport& report, const FeeSchedule& schedule)
{
    json lines = json::array();
    for (const auto& l : report.lines)
        lines.push_back({
            {"label", l.label},
            {"kind", l.kind ? json(std::string(to_string(*l.kind))) : json(nullptr)},
            {"count", l.count},
            {"unit_bnb", l.unit_bnb.to_string()},
            {"unit_usd", l.unit_usd.to_string(2)},
            {"total_bnb", l.total_bnb.to_string()},
            {"total_usd", l.total_usd.to_string(2)},
        });
    return {
        {"usd_per_bnb", schedule.usd_per_bnb().to_string(2)},
        {"lines", lines},
        {"total_bnb", report.total_bnb.to_string()},
        {"total_usd", report.total_usd.to_string(2)},
    };
}

json chain_lines(std::span<const Block> blocks, const FeeSchedule& schedule)
{
    json out = json::array();
    std::istringstream in(export_chain(blocks, schedule));
    for (std::string line; std::getline(in, line);)
        out.push_back(json::parse(line));
    return out;
}

}  // namespace coaat::wire
