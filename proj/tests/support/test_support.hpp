#pragma once

// Shared helpers for unit and acceptance tests: fixture access, temp dirs, a
// DOT grammar checker, and small builders for hand-made events.

#include "wormtrace/corpus.hpp"
#include "wormtrace/report.hpp"
#include "wormtrace/worm_simulator.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <tuple>
#include <string>
#include <vector>

namespace testsupport {

using namespace wormtrace;
namespace fs = std::filesystem;

inline fs::path fixture_path(const std::string& rel) { return fs::path(WORMTRACE_FIXTURES) / rel; }
inline std::string fixture(const std::string& rel) { return read_file(fixture_path(rel)); }

inline const HostId kTarmizi{"TARMIZI", *Ipv4::parse("192.168.2.10")};
inline const HostId kSahib{"SAHIB", *Ipv4::parse("192.168.4.20")};
inline const HostId kYusof{"YUSOF", *Ipv4::parse("192.168.11.20")};

inline Ipv4 ip(const char* text) { return *Ipv4::parse(text); }
inline Timestamp at(const char* iso) { return *Timestamp::parse_iso(iso); }
inline Timestamp lab_time(const char* hms) { return at((std::string("2009-09-07 ") + hms).c_str()); }

inline std::vector<NormalizedEvent> events_of(const ParseReport& r) { return r.events; }

inline std::vector<NormalizedEvent> concat(std::initializer_list<std::vector<NormalizedEvent>> parts) {
    std::vector<NormalizedEvent> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

/// Events in (ts, input order), as EventStore would yield them for one host.
inline std::vector<NormalizedEvent> ordered(std::vector<NormalizedEvent> evs) {
    std::stable_sort(evs.begin(), evs.end(),
                     [](const auto& a, const auto& b) { return event_time(a) < event_time(b); });
    return evs;
}

inline std::vector<IdsAlert> alerts_of(const ParseReport& r) {
    std::vector<IdsAlert> out;
    for (const auto& ev : r.events) out.push_back(std::get<IdsAlert>(ev));
    return out;
}

inline FirewallEvent fw(const HostId& host, const char* iso, FirewallAction action, TransportProtocol proto,
                        const char* src, const char* dst, std::uint16_t sport, std::uint16_t dport) {
    return FirewallEvent{host, at(iso), action, "", proto, "", ip(src), ip(dst), sport, dport};
}

inline SecurityEvent process_592(const HostId& host, const char* iso, const std::string& user,
                                 const std::string& image) {
    SecurityEvent ev;
    ev.host = host;
    ev.ts = at(iso);
    ev.source = "Security";
    ev.type = "Success Audit";
    ev.category = "Detailed Tracking";
    ev.event_id = 592;
    ev.user = user;
    ev.computer = host.name;
    ev.raw_message = "A new process has been created:\nImage File Name: " + image;
    ev.image_file_name = image;
    return ev;
}

inline SystemEvent system_event(const HostId& host, const char* iso, std::uint32_t id, const std::string& source) {
    SystemEvent ev;
    ev.host = host;
    ev.ts = at(iso);
    ev.source = source;
    ev.type = "Information";
    ev.category = "None";
    ev.event_id = id;
    ev.user = "N/A";
    ev.computer = host.name;
    ev.raw_message = "m";
    return ev;
}

class TempDir {
public:
    TempDir() {
        static std::mt19937_64 gen{std::random_device{}()};
        path_ = fs::temp_directory_path() / ("wormtrace_test_" + std::to_string(gen()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

// DOT grammar checker for the subset any DOT producer here may emit:
//   graph     : ("digraph" | "graph") [ID] "{" stmt* "}"
//   stmt      : (node_stmt | edge_stmt | attr_stmt | ID "=" ID) [";"]
//   node_stmt : ID [attr_list]
//   edge_stmt : ID ("->" ID)+ [attr_list]
//   attr_stmt : ("graph" | "node" | "edge") attr_list
//   attr_list : "[" [ID "=" ID ([","|";"] ID "=" ID)*] "]"
//   ID        : [A-Za-z_][A-Za-z_0-9]* | numeral | double-quoted string with \" escapes
struct DotGraph {
    std::string name;
    std::map<std::string, std::map<std::string, std::string>> nodes;
    struct EdgeStmt {
        std::string from, to;
        std::map<std::string, std::string> attrs;
    };
    std::vector<EdgeStmt> edges;
};

class DotChecker {
public:
    explicit DotChecker(std::string_view text) : s_(text) {}

    DotGraph parse() {
        DotGraph g;
        const auto kw = id();
        if (kw != "digraph" && kw != "graph") fail("expected digraph");
        skip_ws();
        if (peek() != '{') g.name = id();
        expect('{');
        for (;;) {
            skip_ws();
            if (peek() == '}') break;
            if (at_end()) fail("unterminated graph body");
            statement(g);
        }
        expect('}');
        skip_ws();
        if (!at_end()) fail("trailing content");
        for (const auto& e : g.edges)
            if (!g.nodes.contains(e.from) || !g.nodes.contains(e.to)) fail("edge references undeclared node");
        return g;
    }

private:
    void statement(DotGraph& g) {
        auto first = id();
        skip_ws();
        if ((first == "graph" || first == "node" || first == "edge") && peek() == '[') {
            attrs();
        } else if (peek() == '=') {
            ++pos_;
            id();
        } else if (s_.substr(pos_, 2) == "->") {
            std::vector<std::string> chain{first};
            while (skip_ws(), s_.substr(pos_, 2) == "->") {
                pos_ += 2;
                chain.push_back(id());
            }
            skip_ws();
            auto a = peek() == '[' ? attrs() : std::map<std::string, std::string>{};
            for (std::size_t i = 0; i + 1 < chain.size(); ++i) g.edges.push_back({chain[i], chain[i + 1], a});
        } else {
            auto a = peek() == '[' ? attrs() : std::map<std::string, std::string>{};
            g.nodes[first].insert(a.begin(), a.end());
        }
        skip_ws();
        if (peek() == ';') ++pos_;
    }

    std::map<std::string, std::string> attrs() {
        std::map<std::string, std::string> out;
        expect('[');
        skip_ws();
        while (peek() != ']') {
            auto key = id();
            expect('=');
            out[key] = id();
            skip_ws();
            if (peek() == ',' || peek() == ';') ++pos_;
            skip_ws();
            if (at_end()) fail("unterminated attribute list");
        }
        ++pos_;
        return out;
    }

    std::string id() {
        skip_ws();
        if (at_end()) fail("expected identifier");
        std::string out;
        if (peek() == '"') {
            ++pos_;
            while (!at_end() && peek() != '"') {
                if (peek() == '\\' && pos_ + 1 < s_.size()) {
                    if (s_[pos_ + 1] != '"' && s_[pos_ + 1] != '\\') out += '\\';
                    ++pos_;
                }
                out += s_[pos_++];
            }
            if (at_end()) fail("unterminated string");
            ++pos_;
            return out;
        }
        const auto c = static_cast<unsigned char>(peek());
        if (std::isalpha(c) || c == '_') {
            while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) out += s_[pos_++];
            return out;
        }
        if (std::isdigit(c) || c == '-' || c == '.') {
            if (c == '-') out += s_[pos_++];
            while (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) out += s_[pos_++];
            if (out.empty() || out == "-") fail("bad numeral");
            return out;
        }
        fail("expected identifier");
    }

    void expect(char c) {
        skip_ws();
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }
    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    char peek() const { return at_end() ? '\0' : s_[pos_]; }
    bool at_end() const { return pos_ >= s_.size(); }
    [[noreturn]] void fail(const std::string& what) const {
        throw std::runtime_error("DOT syntax error at offset " + std::to_string(pos_) + ": " + what);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

inline DotGraph parse_dot(std::string_view text) { return DotChecker(text).parse(); }

/// (from, to, ports) view of ground-truth and recovered edges.
using EdgeKey = std::tuple<Ipv4, Ipv4, PortSet>;

inline std::multiset<EdgeKey> edge_keys(const GroundTruth& truth) {
    std::multiset<EdgeKey> out;
    for (const auto& e : truth.edges) out.insert({e.from, e.to, e.ports_reached});
    return out;
}

inline std::multiset<EdgeKey> edge_keys(const ScenarioGraph& graph) {
    std::multiset<EdgeKey> out;
    for (const auto& e : graph.edges) out.insert({e.from, e.to, e.ports_reached});
    return out;
}

inline std::map<std::string, ExpectedRole> roles_of(const Analysis& analysis) {
    std::map<std::string, ExpectedRole> out;
    for (const auto& r : analysis.roles) out[r.host.name] = {r.role, r.origin};
    return out;
}

struct SimAnalysis {
    SimulationResult sim;
    Corpus corpus;
    Analysis analysis;
};

inline SimAnalysis simulate_and_analyze(const SimulationConfig& cfg, const MatchOverrides& overrides = {},
                                        bool strict = true) {
    SimAnalysis out{simulate(cfg), {}, {}};
    out.corpus = load_corpus(out.sim.files, LoadOptions{strict, std::nullopt});
    out.analysis = analyze(out.corpus, effective_config(out.corpus.manifest, overrides));
    return out;
}

}  // namespace testsupport

namespace testsupport {

struct Reparsed {
    ParseReport report;
    std::string rewritten;
};

/// Parses one corpus file by its path convention and serializes the events
/// back with the writers. Host files are looked up in the manifest.
inline Reparsed reparse_corpus_file(const std::string& rel, const std::string& text, const CorpusManifest& manifest,
                                    int ids_year, bool strict = true) {
    Reparsed out;
    if (rel == kDefaultIdsLog) {
        out.report = parse_ids_alert_log(text, YearHint{ids_year}, strict);
        for (std::size_t i = 0; i < out.report.events.size(); ++i) {
            if (i) out.rewritten += '\n';
            out.rewritten += format_ids_block(std::get<IdsAlert>(out.report.events[i]));
        }
        return out;
    }
    const auto slash = rel.find('/');
    if (slash == std::string::npos) throw std::runtime_error("not a host log: " + rel);
    const auto name = rel.substr(0, slash);
    const auto file = rel.substr(slash + 1);
    const auto it = std::find_if(manifest.hosts.begin(), manifest.hosts.end(),
                                 [&](const ManifestHost& h) { return h.name == name; });
    if (it == manifest.hosts.end()) throw std::runtime_error("host not in manifest: " + rel);
    const HostId host{it->name, it->ip};
    if (file == log_file_name(LogKind::Firewall)) {
        out.report = parse_firewall_log(text, host, strict);
        out.rewritten = firewall_log_header();
        for (const auto& ev : out.report.events) out.rewritten += format_firewall_line(std::get<FirewallEvent>(ev)) + "\n";
        return out;
    }
    EventLogKind kind = EventLogKind::Application;
    if (file == log_file_name(LogKind::Security)) kind = EventLogKind::Security;
    else if (file == log_file_name(LogKind::System)) kind = EventLogKind::System;
    out.report = parse_event_log(text, host, kind, strict);
    for (const auto& ev : out.report.events) {
        const EventLogHeader& h = std::holds_alternative<SecurityEvent>(ev)
                                      ? static_cast<const EventLogHeader&>(std::get<SecurityEvent>(ev))
                                      : static_cast<const EventLogHeader&>(std::get<SystemEvent>(ev));
        out.rewritten += format_event_record(h) + "\n";
    }
    return out;
}

/// Log files of a simulated corpus, excluding manifest and ground truth.
inline bool is_log_file(const std::string& rel) {
    return rel != kManifestFile && rel != kGroundTruthFile;
}

}  // namespace testsupport

namespace testsupport {

/// Random single-subnet outbreak: 3..16 hosts, transfer probability 0, 0.5
/// or 1, per-host clock offsets within +-10 s. Mapping from the generator is
/// explicit so the sequence of configs is the same on every platform.
inline SimulationConfig random_config(std::mt19937_64& gen) {
    const auto hosts = static_cast<std::size_t>(3 + gen() % 14);
    auto cfg = default_config(hosts, gen());
    cfg.transfer_success_prob = static_cast<double>(gen() % 3) * 0.5;
    for (const auto& h : cfg.hosts) {
        const auto offset = static_cast<long>(gen() % 21) - 10;
        if (offset != 0) cfg.per_host_clock_offset[h.name] = std::chrono::seconds{offset};
    }
    return cfg;
}

}  // namespace testsupport

namespace testsupport {

/// True while a simulated target is rebooting after its crash. Probes in that
/// window leave no trace on the target.
inline bool target_down(const SimulationConfig& cfg, const GroundTruth& truth, Ipv4 target, Timestamp t) {
    if (!cfg.reboot_after_crash) return false;
    const auto host = std::find_if(cfg.hosts.begin(), cfg.hosts.end(), [&](const SimHost& h) { return h.ip == target; });
    if (host == cfg.hosts.end()) return false;
    const auto it = truth.infection_times.find(host->name);
    if (it == truth.infection_times.end()) return false;
    const auto crash = it->second + std::chrono::seconds{4};
    return t > crash && t < crash + cfg.reboot_gap;
}

}  // namespace testsupport
