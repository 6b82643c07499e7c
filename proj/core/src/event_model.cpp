#include "wormtrace/event_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace wormtrace {

namespace {

bool parse_uint(std::string_view text, unsigned& out) {
    if (text.empty()) return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

struct Civil {
    int year;
    unsigned month, day, hour, minute, second;
    std::uint32_t micros;
};

Civil to_civil(const Timestamp& ts) {
    using namespace std::chrono;
    const auto day_point = floor<days>(ts.instant);
    const year_month_day ymd{day_point};
    const auto since_midnight = ts.instant - day_point;
    const auto secs = duration_cast<seconds>(since_midnight).count();
    const auto micros = static_cast<std::uint32_t>((since_midnight - seconds{secs}).count());
    return {static_cast<int>(ymd.year()),         static_cast<unsigned>(ymd.month()),
            static_cast<unsigned>(ymd.day()),     static_cast<unsigned>(secs / 3600),
            static_cast<unsigned>(secs / 60 % 60), static_cast<unsigned>(secs % 60),
            micros};
}

}  // namespace

std::optional<Ipv4> Ipv4::parse(std::string_view text) {
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) {
        const auto dot = text.find('.');
        const bool last = i == 3;
        if (last != (dot == std::string_view::npos)) return std::nullopt;
        const auto part = last ? text : text.substr(0, dot);
        if (part.empty() || part.size() > 3) return std::nullopt;
        unsigned octet = 0;
        if (!parse_uint(part, octet) || octet > 255) return std::nullopt;
        value = (value << 8) | octet;
        if (!last) text.remove_prefix(dot + 1);
    }
    return Ipv4{value};
}

std::string Ipv4::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", value >> 24, (value >> 16) & 0xff, (value >> 8) & 0xff,
                  value & 0xff);
    return buf;
}

Timestamp Timestamp::from_civil(int year, unsigned month, unsigned day, unsigned hour, unsigned minute,
                                unsigned second, std::uint32_t micros) {
    using namespace std::chrono;
    const sys_days date{std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day}};
    return Timestamp{date + hours{hour} + minutes{minute} + seconds{second} + microseconds{micros}};
}

std::optional<Timestamp> Timestamp::parse_iso(std::string_view text) {
    // YYYY-MM-DD HH:MM:SS[.ffffff]
    unsigned micros = 0;
    if (text.size() == 26) {
        if (text[19] != '.' || !parse_uint(text.substr(20), micros)) return std::nullopt;
        text = text.substr(0, 19);
    }
    if (text.size() != 19 || text[4] != '-' || text[7] != '-' || text[10] != ' ' || text[13] != ':' ||
        text[16] != ':')
        return std::nullopt;
    unsigned y, mo, d, h, mi, s;
    if (!parse_uint(text.substr(0, 4), y) || !parse_uint(text.substr(5, 2), mo) ||
        !parse_uint(text.substr(8, 2), d) || !parse_uint(text.substr(11, 2), h) ||
        !parse_uint(text.substr(14, 2), mi) || !parse_uint(text.substr(17, 2), s))
        return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(y)}, std::chrono::month{mo},
                                          std::chrono::day{d}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 59) return std::nullopt;
    return from_civil(static_cast<int>(y), mo, d, h, mi, s, micros);
}

int Timestamp::year() const { return to_civil(*this).year; }
std::uint32_t Timestamp::micros() const { return to_civil(*this).micros; }

std::string Timestamp::iso() const {
    const auto c = to_civil(*this);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02u:%02u:%02u", c.year, c.month, c.day, c.hour, c.minute,
                  c.second);
    return buf;
}

std::string Timestamp::iso_micros() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, ".%06u", micros());
    return iso() + buf;
}

std::string Timestamp::us_date() const {
    const auto c = to_civil(*this);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02u/%02u/%04d", c.month, c.day, c.year);
    return buf;
}

std::string Timestamp::time_of_day() const {
    const auto c = to_civil(*this);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02u:%02u:%02u", c.hour, c.minute, c.second);
    return buf;
}

std::string_view to_string(FirewallAction action) {
    switch (action) {
        case FirewallAction::Open: return "OPEN";
        case FirewallAction::OpenInbound: return "OPEN-INBOUND";
        case FirewallAction::Close: return "CLOSE";
        case FirewallAction::Drop: return "DROP";
        case FirewallAction::Other: break;
    }
    return "OTHER";
}

std::string_view to_string(TransportProtocol protocol) {
    switch (protocol) {
        case TransportProtocol::Tcp: return "TCP";
        case TransportProtocol::Udp: return "UDP";
        case TransportProtocol::Other: break;
    }
    return "OTHER";
}

FirewallAction parse_firewall_action(std::string_view token) {
    if (token == "OPEN") return FirewallAction::Open;
    if (token == "OPEN-INBOUND") return FirewallAction::OpenInbound;
    if (token == "CLOSE") return FirewallAction::Close;
    if (token == "DROP") return FirewallAction::Drop;
    return FirewallAction::Other;
}

TransportProtocol parse_transport_protocol(std::string_view token) {
    if (token == "TCP") return TransportProtocol::Tcp;
    if (token == "UDP") return TransportProtocol::Udp;
    return TransportProtocol::Other;
}

std::string_view to_string(EventLogKind kind) {
    switch (kind) {
        case EventLogKind::Security: return "security";
        case EventLogKind::System: return "system";
        case EventLogKind::Application: return "application";
    }
    return "system";
}

Timestamp event_time(const NormalizedEvent& ev) {
    return std::visit([](const auto& e) { return e.ts; }, ev);
}

const HostId* event_host(const NormalizedEvent& ev) {
    return std::visit(
        [](const auto& e) -> const HostId* {
            if constexpr (std::is_same_v<std::decay_t<decltype(e)>, IdsAlert>)
                return nullptr;
            else
                return &e.host;
        },
        ev);
}

std::string to_lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string path_basename_lower(std::string_view path) {
    const auto cut = path.find_last_of("\\/");
    return to_lower(cut == std::string_view::npos ? path : path.substr(cut + 1));
}

void EventStore::add_host(const HostId& host) {
    if (host.name.empty()) throw Error("host name must not be empty");
    const auto key = to_lower(host.name);
    if (auto it = hosts_.find(key); it != hosts_.end()) {
        if (it->second == host) return;
        throw Error("host name registered twice: " + host.name);
    }
    if (find_host_by_ip(host.ip)) throw Error("host ip registered twice: " + host.ip.to_string());
    hosts_.emplace(key, host);
    host_order_.push_back(host);
}

void EventStore::insert(NormalizedEvent ev) {
    if (const HostId* host = event_host(ev)) {
        const HostId* known = find_host(host->name);
        if (!known) throw UnknownHost(host->name);
    }
    const Key key{event_time(ev), next_seq_++};
    events_.emplace(key, std::move(ev));
}

std::vector<NormalizedEvent> EventStore::events() const {
    std::vector<NormalizedEvent> out;
    out.reserve(events_.size());
    for (const auto& [key, ev] : events_) out.push_back(ev);
    return out;
}

std::vector<NormalizedEvent> EventStore::events_for_host(const HostId& host) const {
    const HostId* known = find_host(host.name);
    if (!known) throw UnknownHost(host.name);
    const auto key = to_lower(host.name);
    std::vector<NormalizedEvent> out;
    for (const auto& [k, ev] : events_) {
        const HostId* owner = event_host(ev);
        if (owner && to_lower(owner->name) == key) out.push_back(ev);
    }
    return out;
}

std::vector<IdsAlert> EventStore::ids_alerts() const {
    std::vector<IdsAlert> out;
    for (const auto& [k, ev] : events_)
        if (const auto* alert = std::get_if<IdsAlert>(&ev)) out.push_back(*alert);
    return out;
}

const HostId* EventStore::find_host(std::string_view name) const {
    auto it = hosts_.find(to_lower(name));
    return it == hosts_.end() ? nullptr : &it->second;
}

const HostId* EventStore::find_host_by_ip(Ipv4 ip) const {
    for (const auto& host : host_order_)
        if (host.ip == ip) return &host;
    return nullptr;
}

}  // namespace wormtrace
