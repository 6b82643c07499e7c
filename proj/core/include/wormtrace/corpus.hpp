#pragma once

/// @file corpus.hpp
/// @brief Corpus directory convention, manifest format, and the end-to-end
/// analysis pipeline.
///
/// Layout:
///   DIR/manifest.json
///   DIR/<HOST>/pfirewall.log | security.log | system.log | application.log
///   DIR/ids/alert.log
///
/// manifest.json:
///   {
///     "hosts": [{"name": "SAHIB", "ip": "192.168.4.20",
///                "logs": ["firewall", "security", "system"]}],
///     "ids_log": "ids/alert.log",            // optional
///     "year_hint": 2009,                     // optional
///     "match_config": {"stage_window_s": 60, "ids_skew_s": 30,
///                      "worm_binaries": [...], "loader_binaries": [...],
///                      "system_accounts": [...]}   // optional, each key optional
///   }

#include "wormtrace/classifier.hpp"
#include "wormtrace/log_parsers.hpp"
#include "wormtrace/scenario_graph.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wormtrace {

enum class LogKind { Firewall, Security, System, Application };

std::string_view to_string(LogKind kind);
std::optional<LogKind> parse_log_kind(std::string_view text);
/// "pfirewall.log", "security.log", "system.log", "application.log".
std::string_view log_file_name(LogKind kind);

inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kDefaultIdsLog = "ids/alert.log";

struct ManifestHost {
    std::string name;
    Ipv4 ip;
    std::vector<LogKind> logs;

    friend bool operator==(const ManifestHost&, const ManifestHost&) = default;
};

/// Partial MatchConfig; unset keys keep the defaults.
struct MatchOverrides {
    std::optional<std::chrono::seconds> stage_window;
    std::optional<std::chrono::seconds> ids_skew;
    std::optional<std::set<std::string>> worm_binaries;
    std::optional<std::set<std::string>> loader_binaries;
    std::optional<std::set<std::string>> system_accounts;

    void apply(MatchConfig& cfg) const;

    friend bool operator==(const MatchOverrides&, const MatchOverrides&) = default;
};

struct CorpusManifest {
    std::vector<ManifestHost> hosts;
    std::optional<std::string> ids_log;
    std::optional<int> year_hint;
    MatchOverrides match_config;

    /// Throws Error on duplicate names (case-insensitive) or addresses, host
    /// names that are not plain directory names, or an ids_log escaping the corpus.
    void validate() const;

    friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

std::string manifest_to_json(const CorpusManifest& manifest);
/// Throws Error on malformed JSON or schema violations.
CorpusManifest manifest_from_json(std::string_view text);

struct FileParseSummary {
    std::string path;  ///< relative to the corpus directory
    std::string host;  ///< empty for the IDS log
    LogKind kind = LogKind::Firewall;
    bool ids = false;
    std::size_t events = 0;
    std::vector<SkippedUnit> skipped;
};

struct Corpus {
    CorpusManifest manifest;
    EventStore store;
    int ids_year = 1970;
    std::vector<FileParseSummary> files;
};

struct LoadOptions {
    bool strict = false;
    std::optional<int> year;  ///< overrides the manifest hint
};

std::string read_file(const std::filesystem::path& path);

/// Returns the content of a corpus-relative path ('/' separators), or nullopt if absent.
using CorpusReader = std::function<std::optional<std::string>(const std::string& relative_path)>;

/// Reads manifest.json and every declared log. Throws Error for a missing or
/// invalid manifest or a missing declared log, ParseError in strict mode.
Corpus load_corpus(const CorpusReader& read, const LoadOptions& options = {});
Corpus load_corpus(const std::filesystem::path& dir, const LoadOptions& options = {});
/// In-memory corpus keyed by relative path.
Corpus load_corpus(const std::map<std::string, std::string>& files, const LoadOptions& options = {});

/// IDS year when the manifest gives none: the earliest firewall event's year,
/// else the earliest event-log year, else 1970.
int infer_ids_year(const EventStore& host_events);

struct Analysis {
    MatchConfig config;
    std::vector<HostRole> roles;  ///< manifest order
    ScenarioGraph graph;
};

/// Per-host matching runs in manifest order; IDS alerts are shared.
Analysis analyze(const Corpus& corpus, const MatchConfig& config);

/// Defaults, then manifest overrides, then the caller's overrides.
MatchConfig effective_config(const CorpusManifest& manifest, const MatchOverrides& cli = {});

}  // namespace wormtrace
