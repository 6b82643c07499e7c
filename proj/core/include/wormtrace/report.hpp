#pragma once

/// @file report.hpp
/// @brief Serializable analysis report, human summary and event JSON lines.
///
/// The report is plain data: every timestamp is "YYYY-MM-DD HH:MM:SS.ffffff",
/// every address dotted-quad, every role/evidence name its to_string form.
/// schema_version changes on any incompatible change to the JSON layout.

#include "wormtrace/corpus.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wormtrace {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::string_view kToolName = "wormtrace";
inline constexpr std::string_view kToolVersion = "1.0.0";

struct ConfigEcho {
    std::int64_t stage_window_s = 0;
    std::int64_t ids_skew_s = 0;
    int ids_year = 1970;
    std::vector<std::string> worm_binaries;
    std::vector<std::string> loader_binaries;
    std::vector<std::string> system_accounts;

    friend bool operator==(const ConfigEcho&, const ConfigEcho&) = default;
};

struct SourceCount {
    std::string path;
    std::string host;  ///< empty for the IDS log
    std::string kind;  ///< firewall | security | system | application | ids
    std::uint64_t events = 0;
    std::uint64_t skipped = 0;

    friend bool operator==(const SourceCount&, const SourceCount&) = default;
};

struct CorpusSummary {
    std::uint64_t hosts = 0;
    std::uint64_t events = 0;
    std::uint64_t ids_alerts = 0;
    std::vector<SourceCount> sources;

    friend bool operator==(const CorpusSummary&, const CorpusSummary&) = default;
};

struct SequenceDigest {
    std::string peer;
    std::vector<std::uint16_t> ports;  ///< stage order
    std::string t135;
    std::optional<std::string> t4444;
    std::optional<std::string> t69;

    friend bool operator==(const SequenceDigest&, const SequenceDigest&) = default;
};

struct ProcessDigest {
    std::string time;
    std::string image;
    std::string user;

    friend bool operator==(const ProcessDigest&, const ProcessDigest&) = default;
};

struct VictimDigest {
    SequenceDigest sequence;
    std::string completeness;
    std::vector<ProcessDigest> impact_592;
    std::optional<std::string> impact_7031;
    std::optional<std::string> impact_1074;
    std::optional<std::string> ids_tftp_get;
    std::optional<std::string> infection_time;

    friend bool operator==(const VictimDigest&, const VictimDigest&) = default;
};

struct AttackerDigest {
    std::vector<SequenceDigest> sequences;
    std::optional<ProcessDigest> activation_592;
    std::optional<std::string> ids_portsweep;

    friend bool operator==(const AttackerDigest&, const AttackerDigest&) = default;
};

struct MultiStepDigest {
    std::string infection_time;
    std::string first_outbound;
    std::optional<ProcessDigest> relay_592;

    friend bool operator==(const MultiStepDigest&, const MultiStepDigest&) = default;
};

struct HostReport {
    std::string name;
    std::string ip;
    std::string role;
    bool origin = false;
    std::vector<std::string> anomalies;
    std::vector<VictimDigest> victim;
    std::optional<AttackerDigest> attacker;
    std::optional<MultiStepDigest> multistep;

    friend bool operator==(const HostReport&, const HostReport&) = default;
};

struct EdgeReport {
    std::string from;
    std::string to;
    std::optional<std::string> from_host;
    std::optional<std::string> to_host;
    std::vector<std::uint16_t> ports;
    std::string first_seen;
    std::vector<std::string> evidence;
    std::vector<std::string> anomalies;

    friend bool operator==(const EdgeReport&, const EdgeReport&) = default;
};

struct AnalysisReport {
    int schema_version = kReportSchemaVersion;
    std::string tool = std::string(kToolName);
    std::string version = std::string(kToolVersion);
    ConfigEcho config;
    CorpusSummary corpus;
    std::vector<HostReport> hosts;
    std::vector<EdgeReport> edges;  ///< timeline order
    std::vector<std::string> unattributed_peers;
    /// Host audit anomalies followed by edge anomalies.
    std::vector<std::string> anomalies;

    friend bool operator==(const AnalysisReport&, const AnalysisReport&) = default;
};

AnalysisReport make_report(const Corpus& corpus, const Analysis& analysis);

/// Pretty-printed, keys sorted, trailing newline.
std::string report_to_json(const AnalysisReport& report);
/// Throws Error on malformed JSON, a missing key, or an unsupported schema_version.
AnalysisReport report_from_json(std::string_view text);

/// Host/role table followed by the edge timeline.
std::string render_summary(const AnalysisReport& report);

/// Rebuilds the drawable part of the scenario graph (nodes, roles, edges).
ScenarioGraph graph_from_report(const AnalysisReport& report);

/// One compact JSON object per event, for `wormtrace parse`.
std::string event_to_json(const NormalizedEvent& event);

}  // namespace wormtrace
