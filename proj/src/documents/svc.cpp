#include <algorithm>

#include "coaat/crypto.hpp"
#include "coaat/documents.hpp"

namespace coaat {

namespace {

constexpr int kChecksumModulus = 1019;
constexpr std::string_view kMarkerPrefix = "SVC:";

int digit_value(char c) noexcept
{
    auto pos = kCrockfordAlphabet.find(c);
    return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

char normalize(char c) noexcept
{
    if (c >= 'a' && c <= 'z')
        c = static_cast<char>(c - 'a' + 'A');
    if (c == 'I' || c == 'L')
        return '1';
    if (c == 'O')
        return '0';
    return c;
}

// Offsets of every line that starts with the marker prefix.
std::vector<std::size_t> marker_offsets(std::string_view text)
{
    std::vector<std::size_t> out;
    std::size_t line = 0;
    while (line <= text.size()) {
        if (text.substr(line).starts_with(kMarkerPrefix))
            out.push_back(line);
        auto nl = text.find('\n', line);
        if (nl == std::string_view::npos)
            break;
        line = nl + 1;
    }
    return out;
}

std::string_view view_of(ByteView bytes)
{
    return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

}  // namespace

std::string Svc::checksum(std::string_view payload)
{
    int sum = 0;
    for (std::size_t i = 0; i < payload.size(); ++i)
        sum = (sum + static_cast<int>(i + 1) * digit_value(payload[i])) % kChecksumModulus;
    return {kCrockfordAlphabet[static_cast<std::size_t>(sum / 32)],
            kCrockfordAlphabet[static_cast<std::size_t>(sum % 32)]};
}

bool Svc::checksum_valid(std::string_view code) noexcept
{
    if (code.size() != kLength)
        return false;
    if (!std::all_of(code.begin(), code.end(), [](char c) { return digit_value(c) >= 0; }))
        return false;
    return checksum(code.substr(0, kPayloadLength)) == code.substr(kPayloadLength);
}

Svc Svc::parse(std::string_view text)
{
    std::string code(text);
    std::transform(code.begin(), code.end(), code.begin(), normalize);
    if (!checksum_valid(code))
        throw Error(Errc::MalformedSvc, std::string(text));
    return Svc(std::move(code));
}

void SystemEntropy::fill(std::span<std::uint8_t> out)
{
    random_bytes(out);
}

void SeededEntropy::fill(std::span<std::uint8_t> out)
{
    for (auto& b : out)
        b = static_cast<std::uint8_t>(rng_());
}

Svc generate_svc(EntropySource& entropy)
{
    // 14 characters x 5 bits = 70 bits drawn from 9 bytes.
    std::array<std::uint8_t, 9> raw{};
    entropy.fill(raw);
    std::string code;
    unsigned __int128 bits = 0;
    for (auto b : raw)
        bits = bits << 8 | b;
    for (std::size_t i = 0; i < Svc::kPayloadLength; ++i) {
        code.push_back(kCrockfordAlphabet[static_cast<std::size_t>(bits & 31)]);
        bits >>= 5;
    }
    code += Svc::checksum(code);
    return Svc::parse(code);
}

std::string svc_marker_line(const Svc& svc)
{
    return "SVC: " + svc.str() + "\n";
}

bool has_svc_marker(ByteView body) noexcept
{
    return !marker_offsets(view_of(body)).empty();
}

Bytes embed_svc(ByteView content, const Svc& svc)
{
    if (has_svc_marker(content))
        throw Error(Errc::MarkerAlreadyPresent);
    Bytes out(content.begin(), content.end());
    if (!out.empty() && out.back() != '\n')
        out.push_back('\n');
    auto line = svc_marker_line(svc);
    out.insert(out.end(), line.begin(), line.end());
    return out;
}

Svc extract_svc(ByteView body)
{
    auto text = view_of(body);
    auto offsets = marker_offsets(text);
    if (offsets.empty())
        throw Error(Errc::MissingSvcMarker);
    if (offsets.size() > 1)
        throw Error(Errc::MalformedSvc, "more than one SVC marker line");
    auto line = text.substr(offsets.front());
    constexpr std::size_t kLineLength = 5 + Svc::kLength + 1;
    if (line.size() < kLineLength || !line.starts_with("SVC: ") || line[kLineLength - 1] != '\n')
        throw Error(Errc::MalformedSvc, "marker line does not match 'SVC: <code>\\n'");
    auto code = line.substr(5, Svc::kLength);
    if (!Svc::checksum_valid(code))
        throw Error(Errc::MalformedSvc, std::string(code));
    return Svc::parse(code);
}

Bytes strip_svc(ByteView body)
{
    auto text = view_of(body);
    std::string out;
    std::size_t line = 0;
    while (line < text.size()) {
        auto nl = text.find('\n', line);
        auto end = nl == std::string_view::npos ? text.size() : nl + 1;
        auto current = text.substr(line, end - line);
        if (!current.starts_with(kMarkerPrefix))
            out += current;
        line = end;
    }
    return to_bytes(out);
}

}  // namespace coaat
