#pragma once

/// @file log_parsers.hpp
/// @brief Text parsers and writers for the personal-firewall log, the
/// tab-separated event-log export, and the Snort-style IDS alert log.
///
/// Every parser is a pure function of its input. In lenient mode malformed
/// units are reported in ParseReport::skipped; in strict mode the first one
/// throws ParseError.

#include "wormtrace/event_model.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace wormtrace {

class ParseError : public Error {
public:
    ParseError(std::uint32_t line, std::string reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(std::move(reason)) {}
    std::uint32_t line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::uint32_t line_;
    std::string reason_;
};

struct SkippedUnit {
    std::uint32_t line_number = 0;  ///< 1-based physical line where the unit starts
    std::string reason;

    friend bool operator==(const SkippedUnit&, const SkippedUnit&) = default;
};

struct ParseReport {
    std::vector<NormalizedEvent> events;
    std::vector<SkippedUnit> skipped;
    bool strict = false;
    /// Header, comment and blank units, which are neither events nor errors.
    std::size_t ignored = 0;
    /// Lines (firewall), records (event log) or blocks (IDS) seen, including ignored ones.
    std::size_t units = 0;
};

struct YearHint {
    int year = 1970;

    /// Throws Error outside 1970..9999.
    explicit YearHint(int y);
};

ParseReport parse_firewall_log(std::string_view text, const HostId& host, bool strict = false);
ParseReport parse_event_log(std::string_view text, const HostId& host, EventLogKind kind, bool strict = false);
ParseReport parse_ids_alert_log(std::string_view text, YearHint year, bool strict = false);

/// Fills the labeled sub-fields of a security record from its raw_message.
/// First occurrence of each label wins; labels are case-sensitive.
void extract_message_fields(SecurityEvent& ev);

// Writers produce exactly the formats the parsers accept.

std::string firewall_log_header();
std::string format_firewall_line(const FirewallEvent& ev);
std::string format_event_record(const EventLogHeader& ev);
std::string format_ids_block(const IdsAlert& alert);

/// Splits text into physical lines. A trailing newline does not start a new
/// line; CR before LF is dropped.
std::vector<std::string_view> split_lines(std::string_view text);

}  // namespace wormtrace
