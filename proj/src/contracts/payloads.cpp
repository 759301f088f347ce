#include "coaat/codec.hpp"
#include "coaat/contracts.hpp"

namespace coaat::payload {

namespace {

void put(Encoder& enc, const DossierId& id)
{
    enc.str(id.cadastral_ref).u32(id.seq);
}

DossierId get_dossier(Decoder& dec)
{
    DossierId id;
    id.cadastral_ref = dec.str();
    id.seq = dec.u32();
    return id;
}

Svc get_svc(Decoder& dec)
{
    auto text = dec.str();
    if (!Svc::checksum_valid(text))
        throw Error(Errc::MalformedPayload, "invalid SVC in payload");
    return Svc::parse(text);
}

Role get_role(Decoder& dec)
{
    auto role = role_from_int(dec.u8());
    if (!role)
        throw Error(Errc::MalformedPayload, "role out of range");
    return *role;
}

}  // namespace

Bytes encode(const AddCoaat& p)
{
    Encoder enc;
    enc.fixed(p.admin.bytes()).str(p.coaat_name).str(p.admin_name);
    return enc.take();
}

Bytes encode(const AddUser& p)
{
    Encoder enc;
    enc.fixed(p.user.bytes()).u8(static_cast<std::uint8_t>(p.role)).str(p.name);
    return enc.take();
}

Bytes encode(const RegisterProperty& p)
{
    Encoder enc;
    enc.str(p.cadastral_ref).str(p.cadastral_data);
    return enc.take();
}

Bytes encode(const CreateDossier& p)
{
    Encoder enc;
    enc.str(p.cadastral_ref).str(p.metadata);
    return enc.take();
}

Bytes encode(const AddFile& p)
{
    Encoder enc;
    put(enc, p.dossier);
    enc.str(p.svc.str()).fixed(p.cid.digest).fixed(p.signature);
    return enc.take();
}

Bytes encode(const RequestValidation& p)
{
    Encoder enc;
    put(enc, p.dossier);
    return enc.take();
}

Bytes encode(const ValidateDossier& p)
{
    Encoder enc;
    put(enc, p.dossier);
    enc.u8(static_cast<std::uint8_t>(p.decision)).u32(static_cast<std::uint32_t>(p.reviewed.size()));
    for (const auto& r : p.reviewed)
        enc.str(r.svc.str()).fixed(r.cid.digest).fixed(r.signature);
    return enc.take();
}

template <>
AddCoaat decode<AddCoaat>(ByteView bytes)
{
    Decoder dec(bytes);
    AddCoaat p;
    p.admin = Address(dec.array<Address::kSize>());
    p.coaat_name = dec.str();
    p.admin_name = dec.str();
    dec.expect_done();
    return p;
}

template <>
AddUser decode<AddUser>(ByteView bytes)
{
    Decoder dec(bytes);
    AddUser p;
    p.user = Address(dec.array<Address::kSize>());
    p.role = get_role(dec);
    p.name = dec.str();
    dec.expect_done();
    return p;
}

template <>
RegisterProperty decode<RegisterProperty>(ByteView bytes)
{
    Decoder dec(bytes);
    RegisterProperty p;
    p.cadastral_ref = dec.str();
    p.cadastral_data = dec.str();
    dec.expect_done();
    return p;
}

template <>
CreateDossier decode<CreateDossier>(ByteView bytes)
{
    Decoder dec(bytes);
    CreateDossier p;
    p.cadastral_ref = dec.str();
    p.metadata = dec.str();
    dec.expect_done();
    return p;
}

template <>
AddFile decode<AddFile>(ByteView bytes)
{
    Decoder dec(bytes);
    AddFile p;
    p.dossier = get_dossier(dec);
    p.svc = get_svc(dec);
    p.cid.digest = dec.array<32>();
    p.signature = dec.array<32>();
    dec.expect_done();
    return p;
}

template <>
RequestValidation decode<RequestValidation>(ByteView bytes)
{
    Decoder dec(bytes);
    RequestValidation p;
    p.dossier = get_dossier(dec);
    dec.expect_done();
    return p;
}

template <>
ValidateDossier decode<ValidateDossier>(ByteView bytes)
{
    Decoder dec(bytes);
    ValidateDossier p;
    p.dossier = get_dossier(dec);
    auto decision = dec.u8();
    if (decision > static_cast<std::uint8_t>(DossierStatus::Rejected))
        throw Error(Errc::MalformedPayload, "decision out of range");
    p.decision = static_cast<DossierStatus>(decision);
    auto n = dec.u32();
    if (n > dec.remaining())
        throw Error(Errc::MalformedPayload, "review count exceeds payload");
    for (std::uint32_t i = 0; i < n; ++i) {
        ReviewedFile r;
        r.svc = get_svc(dec);
        r.cid.digest = dec.array<32>();
        r.signature = dec.array<32>();
        p.reviewed.push_back(std::move(r));
    }
    dec.expect_done();
    return p;
}

}  // namespace coaat::payload
