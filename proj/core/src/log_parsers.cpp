#include "wormtrace/log_parsers.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <functional>
#include <optional>

namespace wormtrace {

namespace {

constexpr std::string_view kWhitespace = " \t\r";

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(kWhitespace);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(kWhitespace);
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        if (i >= s.size()) break;
        const auto start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
        out.push_back(s.substr(start, i - start));
    }
    return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
    T value{};
    if (s.empty()) return std::nullopt;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

std::optional<unsigned> fixed_digits(std::string_view s, std::size_t pos, std::size_t len) {
    if (pos + len > s.size()) return std::nullopt;
    return parse_number<unsigned>(s.substr(pos, len));
}

bool valid_civil(int y, unsigned mo, unsigned d, unsigned h, unsigned mi, unsigned s) {
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}};
    return ymd.ok() && h < 24 && mi < 60 && s < 60;
}

/// "MM/DD/YYYY" + "HH:MM:SS"
std::optional<Timestamp> parse_us_datetime(std::string_view date, std::string_view time) {
    if (date.size() != 10 || date[2] != '/' || date[5] != '/') return std::nullopt;
    if (time.size() != 8 || time[2] != ':' || time[5] != ':') return std::nullopt;
    auto mo = fixed_digits(date, 0, 2), d = fixed_digits(date, 3, 2), y = fixed_digits(date, 6, 4);
    auto h = fixed_digits(time, 0, 2), mi = fixed_digits(time, 3, 2), s = fixed_digits(time, 6, 2);
    if (!mo || !d || !y || !h || !mi || !s) return std::nullopt;
    if (!valid_civil(static_cast<int>(*y), *mo, *d, *h, *mi, *s)) return std::nullopt;
    return Timestamp::from_civil(static_cast<int>(*y), *mo, *d, *h, *mi, *s);
}

/// Snort "MM/DD-HH:MM:SS.ffffff"
std::optional<Timestamp> parse_snort_time(std::string_view text, int year) {
    if (text.size() < 14 || text[2] != '/' || text[5] != '-' || text[8] != ':' || text[11] != ':')
        return std::nullopt;
    auto mo = fixed_digits(text, 0, 2), d = fixed_digits(text, 3, 2);
    auto h = fixed_digits(text, 6, 2), mi = fixed_digits(text, 9, 2), s = fixed_digits(text, 12, 2);
    if (!mo || !d || !h || !mi || !s) return std::nullopt;
    std::uint32_t micros = 0;
    if (text.size() > 14) {
        if (text[14] != '.' || text.size() < 16 || text.size() > 21) return std::nullopt;
        const auto frac = text.substr(15);
        auto value = parse_number<std::uint32_t>(frac);
        if (!value) return std::nullopt;
        micros = *value;
        for (auto n = frac.size(); n < 6; ++n) micros *= 10;
    }
    if (!valid_civil(year, *mo, *d, *h, *mi, *s)) return std::nullopt;
    return Timestamp::from_civil(year, *mo, *d, *h, *mi, *s, micros);
}

struct Endpoint {
    Ipv4 ip;
    std::optional<std::uint16_t> port;
};

std::optional<Endpoint> parse_endpoint(std::string_view text) {
    const auto colon = text.find(':');
    auto ip = Ipv4::parse(text.substr(0, colon));
    if (!ip) return std::nullopt;
    if (colon == std::string_view::npos) return Endpoint{*ip, std::nullopt};
    auto port = parse_number<std::uint16_t>(text.substr(colon + 1));
    if (!port) return std::nullopt;
    return Endpoint{*ip, *port};
}

/// Collects units, honoring strict mode.
class ReportBuilder {
public:
    explicit ReportBuilder(bool strict) { report_.strict = strict; }

    void event(NormalizedEvent ev) {
        ++report_.units;
        report_.events.push_back(std::move(ev));
    }
    void ignored() {
        ++report_.units;
        ++report_.ignored;
    }
    void skip(std::uint32_t line, std::string reason) {
        if (report_.strict) throw ParseError(line, std::move(reason));
        ++report_.units;
        report_.skipped.push_back({line, std::move(reason)});
    }
    ParseReport take() { return std::move(report_); }

private:
    ParseReport report_;
};

// ---------------------------------------------------------------------------
// Firewall log

std::optional<FirewallEvent> parse_firewall_fields(std::string_view line, const HostId& host,
                                                   std::string& reason) {
    const auto tokens = split_ws(line);
    if (tokens.size() < 8) {
        reason = "expected 8 fields, found " + std::to_string(tokens.size());
        return std::nullopt;
    }
    FirewallEvent ev;
    ev.host = host;
    std::string stamp{tokens[0]};
    stamp += ' ';
    stamp += tokens[1];
    auto ts = Timestamp::parse_iso(stamp);
    if (!ts) {
        reason = "bad date/time '" + stamp + "'";
        return std::nullopt;
    }
    ev.ts = *ts;
    ev.action = parse_firewall_action(tokens[2]);
    if (ev.action == FirewallAction::Other) ev.action_text = tokens[2];
    ev.protocol = parse_transport_protocol(tokens[3]);
    if (ev.protocol == TransportProtocol::Other) ev.protocol_text = tokens[3];
    auto src = Ipv4::parse(tokens[4]);
    auto dst = Ipv4::parse(tokens[5]);
    if (!src || !dst) {
        reason = "bad ip address";
        return std::nullopt;
    }
    auto sport = parse_number<std::uint16_t>(tokens[6]);
    auto dport = parse_number<std::uint16_t>(tokens[7]);
    if (!sport || !dport) {
        reason = "bad port";
        return std::nullopt;
    }
    ev.src_ip = *src;
    ev.dst_ip = *dst;
    ev.src_port = *sport;
    ev.dst_port = *dport;
    return ev;
}

// ---------------------------------------------------------------------------
// Event-log export

struct RawRecord {
    std::uint32_t line = 0;
    std::vector<std::string> fields;
    bool blank = false;
    std::string error;
};

/// Reads one tab-separated record starting at pos; advances pos and line.
RawRecord read_record(std::string_view text, std::size_t& pos, std::uint32_t& line) {
    RawRecord rec;
    rec.line = line;

    const auto eol = text.find('\n', pos);
    const auto first_line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    const auto trimmed = trim(first_line);
    if (trimmed.empty() || trimmed.front() == '#') {
        rec.blank = true;
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        ++line;
        return rec;
    }

    std::string field;
    while (true) {
        field.clear();
        if (pos < text.size() && text[pos] == '"') {
            ++pos;
            bool closed = false;
            while (pos < text.size()) {
                const char c = text[pos];
                if (c == '"') {
                    if (pos + 1 < text.size() && text[pos + 1] == '"') {
                        field += '"';
                        pos += 2;
                        continue;
                    }
                    ++pos;
                    closed = true;
                    break;
                }
                if (c == '\n') ++line;
                field += c;
                ++pos;
            }
            if (!closed) {
                rec.error = "unterminated quoted field";
                // Resynchronize on the line after the record start.
                line = rec.line + 1;
                pos = eol == std::string_view::npos ? text.size() : eol + 1;
                return rec;
            }
            if (pos < text.size() && text[pos] == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
            if (pos < text.size() && text[pos] != '\t' && text[pos] != '\n') {
                rec.error = "garbage after closing quote";
                const auto next = text.find('\n', pos);
                pos = next == std::string_view::npos ? text.size() : next + 1;
                ++line;
                return rec;
            }
        } else {
            while (pos < text.size() && text[pos] != '\t' && text[pos] != '\n') field += text[pos++];
            if (!field.empty() && field.back() == '\r' && (pos >= text.size() || text[pos] == '\n'))
                field.pop_back();
        }
        rec.fields.push_back(field);
        if (pos >= text.size()) break;
        if (text[pos] == '\t') {
            ++pos;
            continue;
        }
        // newline ends the record
        ++pos;
        ++line;
        break;
    }
    return rec;
}

std::optional<std::uint32_t> leading_number(std::string_view value) {
    value = trim(value);
    return parse_number<std::uint32_t>(value);
}

// ---------------------------------------------------------------------------
// IDS alerts

bool parse_bracket_items(std::string_view rest, IdsAlert& alert) {
    rest = trim(rest);
    while (!rest.empty()) {
        if (rest.front() != '[') return false;
        const auto close = rest.find(']');
        if (close == std::string_view::npos) return false;
        const auto item = rest.substr(1, close - 1);
        constexpr std::string_view kClass = "Classification:";
        constexpr std::string_view kPrio = "Priority:";
        if (item.starts_with(kClass)) {
            alert.classification = std::string(trim(item.substr(kClass.size())));
        } else if (item.starts_with(kPrio)) {
            auto prio = parse_number<unsigned>(trim(item.substr(kPrio.size())));
            if (!prio || *prio > 255) return false;
            alert.priority = static_cast<std::uint8_t>(*prio);
        } else {
            // Xref and similar annotations carry nothing we keep.
        }
        rest = trim(rest.substr(close + 1));
    }
    return true;
}

std::optional<IdsProtocol> parse_ids_protocol(const std::vector<std::string_view>& tokens) {
    if (tokens.empty()) return std::nullopt;
    const auto tok = tokens[0];
    if (tok == "TCP") return IdsProtocol::tcp();
    if (tok == "UDP") return IdsProtocol::udp();
    if (tok == "ICMP") return IdsProtocol::proto(1);
    constexpr std::string_view kProto = "PROTO:";
    if (tok.starts_with(kProto)) {
        auto digits = tok.substr(kProto.size());
        if (digits.empty() && tokens.size() > 1) digits = tokens[1];
        auto n = parse_number<unsigned>(digits);
        if (!n || *n > 255) return std::nullopt;
        return IdsProtocol::proto(static_cast<std::uint8_t>(*n));
    }
    return std::nullopt;
}

std::optional<IdsAlert> parse_ids_block(const std::vector<std::string_view>& lines, int year,
                                        std::string& reason) {
    IdsAlert alert;
    std::size_t i = 0;

    // [**] [gid:sid:rev] MESSAGE [**] [optional bracket items]
    auto sig_line = trim(lines[i++]);
    constexpr std::string_view kMarker = "[**]";
    if (!sig_line.starts_with(kMarker)) {
        reason = "missing [**] signature line";
        return std::nullopt;
    }
    sig_line = trim(sig_line.substr(kMarker.size()));
    if (sig_line.empty() || sig_line.front() != '[') {
        reason = "missing [gid:sid:rev]";
        return std::nullopt;
    }
    const auto sig_close = sig_line.find(']');
    if (sig_close == std::string_view::npos) {
        reason = "unterminated signature id";
        return std::nullopt;
    }
    {
        const auto sig = sig_line.substr(1, sig_close - 1);
        const auto c1 = sig.find(':');
        const auto c2 = c1 == std::string_view::npos ? c1 : sig.find(':', c1 + 1);
        if (c2 == std::string_view::npos) {
            reason = "signature id is not gid:sid:rev";
            return std::nullopt;
        }
        auto gid = parse_number<std::uint32_t>(sig.substr(0, c1));
        auto sid = parse_number<std::uint32_t>(sig.substr(c1 + 1, c2 - c1 - 1));
        auto rev = parse_number<std::uint32_t>(sig.substr(c2 + 1));
        if (!gid || !sid || !rev) {
            reason = "signature id is not gid:sid:rev";
            return std::nullopt;
        }
        alert.sig = {*gid, *sid, *rev};
    }
    auto after_sig = sig_line.substr(sig_close + 1);
    const auto msg_end = after_sig.find(kMarker);
    if (msg_end == std::string_view::npos) {
        reason = "message not terminated by [**]";
        return std::nullopt;
    }
    alert.message = std::string(trim(after_sig.substr(0, msg_end)));
    if (!parse_bracket_items(after_sig.substr(msg_end + kMarker.size()), alert)) {
        reason = "bad classification/priority";
        return std::nullopt;
    }

    while (i < lines.size() && trim(lines[i]).starts_with("[")) {
        if (!parse_bracket_items(lines[i], alert)) {
            reason = "bad classification/priority";
            return std::nullopt;
        }
        ++i;
    }

    if (i >= lines.size()) {
        reason = "missing timestamp line";
        return std::nullopt;
    }
    const auto tokens = split_ws(lines[i++]);
    if (tokens.size() < 4 || tokens[2] != "->") {
        reason = "timestamp line is not 'TIME SRC -> DST'";
        return std::nullopt;
    }
    auto ts = parse_snort_time(tokens[0], year);
    if (!ts) {
        reason = "bad timestamp '" + std::string(tokens[0]) + "'";
        return std::nullopt;
    }
    alert.ts = *ts;
    auto src = parse_endpoint(tokens[1]);
    auto dst = parse_endpoint(tokens[3]);
    if (!src || !dst) {
        reason = "bad address";
        return std::nullopt;
    }

    std::optional<IdsProtocol> proto;
    if (tokens.size() > 4) {
        proto = parse_ids_protocol({tokens.begin() + 4, tokens.end()});
    } else if (i < lines.size()) {
        proto = parse_ids_protocol(split_ws(lines[i]));
    }
    if (!proto) {
        reason = "missing or unknown protocol";
        return std::nullopt;
    }
    alert.protocol = *proto;
    const bool has_ports = src->port || dst->port;
    if (has_ports && proto->kind == IdsProtocol::Kind::Proto) {
        reason = "ports on a non-TCP/UDP alert";
        return std::nullopt;
    }
    alert.src_ip = src->ip;
    alert.dst_ip = dst->ip;
    alert.src_port = src->port;
    alert.dst_port = dst->port;
    return alert;
}

std::string quote_field(std::string_view value) {
    if (value.find_first_of("\t\n\r\"") == std::string_view::npos) return std::string(value);
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

YearHint::YearHint(int y) : year(y) {
    if (y < 1970 || y > 9999) throw Error("year hint out of range: " + std::to_string(y));
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        auto line = text.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = eol + 1;
    }
    return lines;
}

ParseReport parse_firewall_log(std::string_view text, const HostId& host, bool strict) {
    ReportBuilder out(strict);
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = trim(lines[i]);
        if (line.empty() || line.front() == '#') {
            out.ignored();
            continue;
        }
        std::string reason;
        if (auto ev = parse_firewall_fields(line, host, reason))
            out.event(std::move(*ev));
        else
            out.skip(static_cast<std::uint32_t>(i + 1), reason);
    }
    return out.take();
}

void extract_message_fields(SecurityEvent& ev) {
    ev.image_file_name.reset();
    ev.new_process_id.reset();
    ev.creator_process_id.reset();
    ev.user_name.reset();
    ev.domain.reset();
    ev.logon_id.reset();

    for (auto line : split_lines(ev.raw_message)) {
        line = trim(line);
        auto take = [&](std::string_view label, auto& slot, auto convert) {
            if (slot || !line.starts_with(label)) return false;
            slot = convert(trim(line.substr(label.size())));
            return true;
        };
        auto as_string = [](std::string_view v) { return std::optional<std::string>(std::string(v)); };
        take("Image File Name:", ev.image_file_name, as_string) ||
            take("New Process ID:", ev.new_process_id, leading_number) ||
            take("Creator Process ID:", ev.creator_process_id, leading_number) ||
            take("User Name:", ev.user_name, as_string) || take("Domain:", ev.domain, as_string) ||
            take("Logon ID:", ev.logon_id, as_string);
    }
}

ParseReport parse_event_log(std::string_view text, const HostId& host, EventLogKind kind, bool strict) {
    ReportBuilder out(strict);
    std::size_t pos = 0;
    std::uint32_t line = 1;
    while (pos < text.size()) {
        auto rec = read_record(text, pos, line);
        if (rec.blank) {
            out.ignored();
            continue;
        }
        if (!rec.error.empty()) {
            out.skip(rec.line, rec.error);
            continue;
        }
        if (rec.fields.size() != 9) {
            out.skip(rec.line, "expected 9 tab-separated fields, found " + std::to_string(rec.fields.size()));
            continue;
        }
        EventLogHeader head;
        head.host = host;
        auto ts = parse_us_datetime(trim(rec.fields[0]), trim(rec.fields[1]));
        if (!ts) {
            out.skip(rec.line, "bad date/time");
            continue;
        }
        head.ts = *ts;
        head.source = rec.fields[2];
        head.type = rec.fields[3];
        head.category = rec.fields[4];
        auto id = parse_number<std::uint32_t>(trim(rec.fields[5]));
        if (!id) {
            out.skip(rec.line, "bad event id '" + rec.fields[5] + "'");
            continue;
        }
        head.event_id = *id;
        head.user = rec.fields[6];
        head.computer = rec.fields[7];
        head.raw_message = rec.fields[8];
        if (head.source.empty()) {
            out.skip(rec.line, "empty source");
            continue;
        }

        if (kind == EventLogKind::Security) {
            if (head.user.empty()) {
                out.skip(rec.line, "empty user");
                continue;
            }
            SecurityEvent ev;
            static_cast<EventLogHeader&>(ev) = head;
            extract_message_fields(ev);
            if (ev.event_id == 592 && !ev.image_file_name) {
                out.skip(rec.line, "event 592 without Image File Name");
                continue;
            }
            out.event(std::move(ev));
        } else {
            SystemEvent ev;
            static_cast<EventLogHeader&>(ev) = head;
            ev.kind = kind;
            out.event(std::move(ev));
        }
    }
    return out.take();
}

ParseReport parse_ids_alert_log(std::string_view text, YearHint year, bool strict) {
    ReportBuilder out(strict);
    const auto lines = split_lines(text);
    std::size_t i = 0;
    while (i < lines.size()) {
        if (trim(lines[i]).empty()) {
            ++i;
            continue;
        }
        const auto start = i;
        std::vector<std::string_view> block;
        while (i < lines.size() && !trim(lines[i]).empty()) block.push_back(lines[i++]);
        if (trim(block.front()).starts_with("#")) {
            out.ignored();
            continue;
        }
        std::string reason;
        if (auto alert = parse_ids_block(block, year.year, reason))
            out.event(std::move(*alert));
        else
            out.skip(static_cast<std::uint32_t>(start + 1), reason);
    }
    return out.take();
}

std::string firewall_log_header() {
    return "#Version: 1.5\n"
           "#Software: Microsoft Windows Firewall\n"
           "#Time Format: Local\n"
           "#Fields: date time action protocol src-ip dst-ip src-port dst-port\n";
}

std::string format_firewall_line(const FirewallEvent& ev) {
    std::string out = ev.ts.iso();
    out += ' ';
    out += ev.action == FirewallAction::Other ? std::string_view(ev.action_text) : to_string(ev.action);
    out += ' ';
    out += ev.protocol == TransportProtocol::Other ? std::string_view(ev.protocol_text) : to_string(ev.protocol);
    out += ' ' + ev.src_ip.to_string() + ' ' + ev.dst_ip.to_string() + ' ' + std::to_string(ev.src_port) + ' ' +
           std::to_string(ev.dst_port);
    return out;
}

std::string format_event_record(const EventLogHeader& ev) {
    const std::array<std::string, 9> fields{ev.ts.us_date(), ev.ts.time_of_day(), ev.source,
                                            ev.type,         ev.category,         std::to_string(ev.event_id),
                                            ev.user,         ev.computer,         ev.raw_message};
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += '\t';
        out += quote_field(fields[i]);
    }
    return out;
}

std::string format_ids_block(const IdsAlert& alert) {
    char buf[64];
    std::string out = "[**] [";
    out += std::to_string(alert.sig.gid) + ':' + std::to_string(alert.sig.sid) + ':' +
           std::to_string(alert.sig.rev) + "] " + alert.message + " [**]\n";
    if (alert.classification || alert.priority) {
        std::string items;
        if (alert.classification) items += "[Classification: " + *alert.classification + "]";
        if (alert.priority) {
            if (!items.empty()) items += ' ';
            items += "[Priority: " + std::to_string(*alert.priority) + "]";
        }
        out += items + '\n';
    }
    const auto iso = alert.ts.iso();  // YYYY-MM-DD HH:MM:SS
    std::snprintf(buf, sizeof buf, "%s/%s-%s.%06u", iso.substr(5, 2).c_str(), iso.substr(8, 2).c_str(),
                  iso.substr(11).c_str(), alert.ts.micros());
    out += buf;
    auto endpoint = [](Ipv4 ip, const std::optional<std::uint16_t>& port) {
        return port ? ip.to_string() + ':' + std::to_string(*port) : ip.to_string();
    };
    out += ' ' + endpoint(alert.src_ip, alert.src_port) + " -> " + endpoint(alert.dst_ip, alert.dst_port) + '\n';
    switch (alert.protocol.kind) {
        case IdsProtocol::Kind::Tcp: out += "TCP TTL:128 TOS:0x0 ID:0 IpLen:20 DgmLen:48\n"; break;
        case IdsProtocol::Kind::Udp: out += "UDP TTL:128 TOS:0x0 ID:0 IpLen:20 DgmLen:48\n"; break;
        case IdsProtocol::Kind::Proto:
            if (alert.protocol.number == 1)
                out += "ICMP TTL:128 TOS:0x0 ID:0 IpLen:20 DgmLen:60\n";
            else
                out += "PROTO:" + std::to_string(alert.protocol.number) + " TTL:0 TOS:0x0 ID:0 IpLen:20 DgmLen:166\n";
            break;
    }
    return out;
}

}  // namespace wormtrace
