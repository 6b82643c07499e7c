#pragma once

/// @file event_model.hpp
/// @brief Normalized event types shared by every log parser and analysis stage.
///
/// Host logs (personal firewall, security, system, application) are attributed
/// to a HostId. IDS alerts are network-level and carry no host attribution.

#include <chrono>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace wormtrace {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownHost : public Error {
public:
    explicit UnknownHost(const std::string& name)
        : Error("unknown host: " + name), host_(name) {}
    const std::string& host() const noexcept { return host_; }

private:
    std::string host_;
};

/// IPv4 address in host byte order.
struct Ipv4 {
    std::uint32_t value = 0;

    static std::optional<Ipv4> parse(std::string_view text);
    static Ipv4 from_octets(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
        return Ipv4{(std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) | d};
    }
    std::string to_string() const;

    friend auto operator<=>(const Ipv4&, const Ipv4&) = default;
};

/// Wall-clock instant with microsecond resolution. Host logs only ever carry
/// whole seconds; IDS alerts carry microseconds.
struct Timestamp {
    using Clock = std::chrono::sys_time<std::chrono::microseconds>;
    Clock instant{};

    static Timestamp from_civil(int year, unsigned month, unsigned day, unsigned hour, unsigned minute,
                                unsigned second, std::uint32_t micros = 0);
    /// Parses "YYYY-MM-DD HH:MM:SS" with an optional ".ffffff" suffix.
    static std::optional<Timestamp> parse_iso(std::string_view text);

    int year() const;
    std::uint32_t micros() const;

    /// "YYYY-MM-DD HH:MM:SS"
    std::string iso() const;
    /// "YYYY-MM-DD HH:MM:SS.ffffff"
    std::string iso_micros() const;
    /// "MM/DD/YYYY" and "HH:MM:SS" as used by event-log exports.
    std::string us_date() const;
    std::string time_of_day() const;

    Timestamp operator+(std::chrono::microseconds d) const { return {instant + d}; }
    Timestamp operator-(std::chrono::microseconds d) const { return {instant - d}; }
    std::chrono::microseconds operator-(const Timestamp& other) const { return instant - other.instant; }

    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

struct HostId {
    std::string name;
    Ipv4 ip;

    friend bool operator==(const HostId&, const HostId&) = default;
};

enum class FirewallAction { Open, OpenInbound, Close, Drop, Other };
enum class TransportProtocol { Tcp, Udp, Other };

struct FirewallEvent {
    HostId host;
    Timestamp ts;
    FirewallAction action = FirewallAction::Other;
    std::string action_text;  ///< verbatim token, meaningful for Other
    TransportProtocol protocol = TransportProtocol::Other;
    std::string protocol_text;
    Ipv4 src_ip;
    Ipv4 dst_ip;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;

    friend bool operator==(const FirewallEvent&, const FirewallEvent&) = default;
};

std::string_view to_string(FirewallAction action);
std::string_view to_string(TransportProtocol protocol);
FirewallAction parse_firewall_action(std::string_view token);
TransportProtocol parse_transport_protocol(std::string_view token);

/// Which Windows event-log channel a record was exported from.
enum class EventLogKind { Security, System, Application };

std::string_view to_string(EventLogKind kind);

/// Columns shared by every event-log export record.
struct EventLogHeader {
    HostId host;
    Timestamp ts;
    std::string source;
    std::string type;
    std::string category;
    std::uint32_t event_id = 0;
    std::string user;
    std::string computer;
    std::string raw_message;

    friend bool operator==(const EventLogHeader&, const EventLogHeader&) = default;
};

struct SecurityEvent : EventLogHeader {
    std::optional<std::string> image_file_name;
    std::optional<std::uint32_t> new_process_id;
    std::optional<std::uint32_t> creator_process_id;
    std::optional<std::string> user_name;
    std::optional<std::string> domain;
    std::optional<std::string> logon_id;

    friend bool operator==(const SecurityEvent&, const SecurityEvent&) = default;
};

/// System and application log records.
struct SystemEvent : EventLogHeader {
    EventLogKind kind = EventLogKind::System;

    friend bool operator==(const SystemEvent&, const SystemEvent&) = default;
};

struct SignatureId {
    std::uint32_t gid = 0;
    std::uint32_t sid = 0;
    std::uint32_t rev = 0;

    friend auto operator<=>(const SignatureId&, const SignatureId&) = default;
};

/// IDS protocol: TCP, UDP, or a raw IP protocol number (ICMP = 1, "PROTO:255").
struct IdsProtocol {
    enum class Kind { Tcp, Udp, Proto };
    Kind kind = Kind::Proto;
    std::uint8_t number = 0;

    static IdsProtocol tcp() { return {Kind::Tcp, 6}; }
    static IdsProtocol udp() { return {Kind::Udp, 17}; }
    static IdsProtocol proto(std::uint8_t n) { return {Kind::Proto, n}; }

    friend bool operator==(const IdsProtocol&, const IdsProtocol&) = default;
};

struct IdsAlert {
    Timestamp ts;
    SignatureId sig;
    std::string message;
    std::optional<std::string> classification;
    std::optional<std::uint8_t> priority;
    Ipv4 src_ip;
    std::optional<std::uint16_t> src_port;
    Ipv4 dst_ip;
    std::optional<std::uint16_t> dst_port;
    IdsProtocol protocol;

    friend bool operator==(const IdsAlert&, const IdsAlert&) = default;
};

using NormalizedEvent = std::variant<FirewallEvent, SecurityEvent, SystemEvent, IdsAlert>;

Timestamp event_time(const NormalizedEvent& ev);
/// Host attribution; nullptr for IDS alerts.
const HostId* event_host(const NormalizedEvent& ev);

/// Case-insensitive final path component, e.g. "C:\WINDOWS\system32\tftp.exe" -> "tftp.exe".
std::string path_basename_lower(std::string_view path);
std::string to_lower(std::string_view text);

/// Time-ordered event collection. Ties keep insertion order. Populated once by
/// a single writer, then read-only.
class EventStore {
public:
    /// Registers a host; names are case-insensitive. Throws Error on a
    /// conflicting duplicate name or ip.
    void add_host(const HostId& host);

    /// Throws UnknownHost when a host-attributed event names an unregistered host.
    void insert(NormalizedEvent ev);

    std::size_t size() const noexcept { return events_.size(); }
    bool empty() const noexcept { return events_.empty(); }

    /// All events in (ts, insertion) order.
    std::vector<NormalizedEvent> events() const;
    std::vector<NormalizedEvent> events_for_host(const HostId& host) const;
    std::vector<IdsAlert> ids_alerts() const;

    const HostId* find_host(std::string_view name) const;
    const HostId* find_host_by_ip(Ipv4 ip) const;
    /// Hosts in registration order.
    const std::vector<HostId>& hosts() const noexcept { return host_order_; }

    friend bool operator==(const EventStore&, const EventStore&) = default;

private:
    struct Key {
        Timestamp ts;
        std::uint64_t seq;
        friend auto operator<=>(const Key&, const Key&) = default;
    };

    std::map<Key, NormalizedEvent> events_;
    std::uint64_t next_seq_ = 0;
    std::map<std::string, HostId> hosts_;  // keyed by lower-case name
    std::vector<HostId> host_order_;
};

}  // namespace wormtrace
