#include "wormtrace/corpus.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace wormtrace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(LogKind kind) {
    switch (kind) {
        case LogKind::Firewall: return "firewall";
        case LogKind::Security: return "security";
        case LogKind::System: return "system";
        case LogKind::Application: return "application";
    }
    return "firewall";
}

std::optional<LogKind> parse_log_kind(std::string_view text) {
    for (auto kind : {LogKind::Firewall, LogKind::Security, LogKind::System, LogKind::Application})
        if (to_string(kind) == text) return kind;
    return std::nullopt;
}

std::string_view log_file_name(LogKind kind) {
    switch (kind) {
        case LogKind::Firewall: return "pfirewall.log";
        case LogKind::Security: return "security.log";
        case LogKind::System: return "system.log";
        case LogKind::Application: return "application.log";
    }
    return "pfirewall.log";
}

void MatchOverrides::apply(MatchConfig& cfg) const {
    if (stage_window) cfg.stage_window = *stage_window;
    if (ids_skew) cfg.ids_skew = *ids_skew;
    if (worm_binaries) cfg.worm_binaries = *worm_binaries;
    if (loader_binaries) cfg.loader_binaries = *loader_binaries;
    if (system_accounts) cfg.system_accounts = *system_accounts;
}

void CorpusManifest::validate() const {
    std::set<std::string> names;
    std::set<Ipv4> ips;
    for (const auto& host : hosts) {
        if (host.name.empty()) throw Error("manifest: host with empty name");
        if (host.name == "." || host.name == ".." || host.name.find_first_of("/\\") != std::string::npos)
            throw Error("manifest: host name '" + host.name + "' is not a plain directory name");
        if (!names.insert(to_lower(host.name)).second) throw Error("manifest: duplicate host name " + host.name);
        if (!ips.insert(host.ip).second) throw Error("manifest: duplicate host ip " + host.ip.to_string());
    }
    if (ids_log) {
        const fs::path p(*ids_log);
        if (ids_log->empty() || p.is_absolute() || ids_log->front() == '/' || ids_log->find('\\') != std::string::npos)
            throw Error("manifest: ids_log must be a relative path");
        for (const auto& part : p)
            if (part == "..") throw Error("manifest: ids_log must stay inside the corpus");
    }
    if (year_hint) YearHint{*year_hint};
}

std::string manifest_to_json(const CorpusManifest& manifest) {
    json j;
    j["hosts"] = json::array();
    for (const auto& host : manifest.hosts) {
        json logs = json::array();
        for (auto kind : host.logs) logs.push_back(to_string(kind));
        j["hosts"].push_back({{"name", host.name}, {"ip", host.ip.to_string()}, {"logs", logs}});
    }
    if (manifest.ids_log) j["ids_log"] = *manifest.ids_log;
    if (manifest.year_hint) j["year_hint"] = *manifest.year_hint;
    const auto& m = manifest.match_config;
    json mc = json::object();
    if (m.stage_window) mc["stage_window_s"] = m.stage_window->count();
    if (m.ids_skew) mc["ids_skew_s"] = m.ids_skew->count();
    if (m.worm_binaries) mc["worm_binaries"] = *m.worm_binaries;
    if (m.loader_binaries) mc["loader_binaries"] = *m.loader_binaries;
    if (m.system_accounts) mc["system_accounts"] = *m.system_accounts;
    if (!mc.empty()) j["match_config"] = mc;
    return j.dump(2) + "\n";
}

CorpusManifest manifest_from_json(std::string_view text) {
    CorpusManifest out;
    try {
        const json j = json::parse(text);
        if (!j.is_object()) throw Error("manifest: top level must be an object");
        for (const auto& h : j.value("hosts", json::array())) {
            ManifestHost host;
            host.name = h.at("name").get<std::string>();
            const auto ip_text = h.at("ip").get<std::string>();
            auto ip = Ipv4::parse(ip_text);
            if (!ip) throw Error("manifest: bad ip '" + ip_text + "' for host " + host.name);
            host.ip = *ip;
            for (const auto& l : h.value("logs", json::array())) {
                auto kind = parse_log_kind(l.get<std::string>());
                if (!kind) throw Error("manifest: unknown log kind '" + l.get<std::string>() + "'");
                host.logs.push_back(*kind);
            }
            out.hosts.push_back(std::move(host));
        }
        if (j.contains("ids_log") && !j["ids_log"].is_null()) out.ids_log = j["ids_log"].get<std::string>();
        if (j.contains("year_hint") && !j["year_hint"].is_null()) out.year_hint = j["year_hint"].get<int>();
        if (j.contains("match_config")) {
            const auto& mc = j["match_config"];
            auto& m = out.match_config;
            if (mc.contains("stage_window_s")) m.stage_window = std::chrono::seconds{mc["stage_window_s"].get<long>()};
            if (mc.contains("ids_skew_s")) m.ids_skew = std::chrono::seconds{mc["ids_skew_s"].get<long>()};
            if (mc.contains("worm_binaries")) m.worm_binaries = mc["worm_binaries"].get<std::set<std::string>>();
            if (mc.contains("loader_binaries")) m.loader_binaries = mc["loader_binaries"].get<std::set<std::string>>();
            if (mc.contains("system_accounts")) m.system_accounts = mc["system_accounts"].get<std::set<std::string>>();
        }
    } catch (const json::exception& e) {
        throw Error(std::string("manifest: ") + e.what());
    }
    out.validate();
    return out;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int infer_ids_year(const EventStore& store) {
    std::optional<Timestamp> firewall, other;
    for (const auto& ev : store.events()) {
        if (std::holds_alternative<IdsAlert>(ev)) continue;
        auto& slot = std::holds_alternative<FirewallEvent>(ev) ? firewall : other;
        if (!slot) slot = event_time(ev);
    }
    if (firewall) return firewall->year();
    if (other) return other->year();
    return 1970;
}

Corpus load_corpus(const CorpusReader& read, const LoadOptions& options) {
    const auto manifest_text = read(std::string(kManifestFile));
    if (!manifest_text) throw Error("missing " + std::string(kManifestFile));

    Corpus corpus;
    corpus.manifest = manifest_from_json(*manifest_text);
    for (const auto& host : corpus.manifest.hosts) corpus.store.add_host({host.name, host.ip});

    for (const auto& mh : corpus.manifest.hosts) {
        const HostId host{mh.name, mh.ip};
        for (auto kind : mh.logs) {
            const auto rel = mh.name + "/" + std::string(log_file_name(kind));
            const auto text = read(rel);
            if (!text) throw Error("declared log missing: " + rel);
            ParseReport report;
            try {
                switch (kind) {
                    case LogKind::Firewall: report = parse_firewall_log(*text, host, options.strict); break;
                    case LogKind::Security:
                        report = parse_event_log(*text, host, EventLogKind::Security, options.strict);
                        break;
                    case LogKind::System:
                        report = parse_event_log(*text, host, EventLogKind::System, options.strict);
                        break;
                    case LogKind::Application:
                        report = parse_event_log(*text, host, EventLogKind::Application, options.strict);
                        break;
                }
            } catch (const ParseError& e) {
                throw ParseError(e.line(), rel + ": " + e.reason());
            }
            corpus.files.push_back({rel, mh.name, kind, false, report.events.size(), report.skipped});
            for (auto& ev : report.events) corpus.store.insert(std::move(ev));
        }
    }

    corpus.ids_year = options.year.value_or(corpus.manifest.year_hint.value_or(infer_ids_year(corpus.store)));
    const auto ids_rel = corpus.manifest.ids_log.value_or(std::string(kDefaultIdsLog));
    const auto ids_text = read(ids_rel);
    if (corpus.manifest.ids_log && !ids_text) throw Error("declared IDS log missing: " + ids_rel);
    if (ids_text) {
        ParseReport report;
        try {
            report = parse_ids_alert_log(*ids_text, YearHint{corpus.ids_year}, options.strict);
        } catch (const ParseError& e) {
            throw ParseError(e.line(), ids_rel + ": " + e.reason());
        }
        corpus.files.push_back({ids_rel, "", LogKind::Firewall, true, report.events.size(), report.skipped});
        for (auto& ev : report.events) corpus.store.insert(std::move(ev));
    }
    return corpus;
}

Corpus load_corpus(const fs::path& dir, const LoadOptions& options) {
    if (!fs::is_directory(dir)) throw Error("not a corpus directory: " + dir.string());
    return load_corpus(
        [&](const std::string& rel) -> std::optional<std::string> {
            const auto path = dir / rel;
            if (!fs::is_regular_file(path)) return std::nullopt;
            return read_file(path);
        },
        options);
}

Corpus load_corpus(const std::map<std::string, std::string>& files, const LoadOptions& options) {
    return load_corpus(
        [&](const std::string& rel) -> std::optional<std::string> {
            auto it = files.find(rel);
            if (it == files.end()) return std::nullopt;
            return it->second;
        },
        options);
}

MatchConfig effective_config(const CorpusManifest& manifest, const MatchOverrides& cli) {
    MatchConfig cfg;
    manifest.match_config.apply(cfg);
    cli.apply(cfg);
    cfg.validate();
    return cfg;
}

Analysis analyze(const Corpus& corpus, const MatchConfig& config) {
    config.validate();
    Analysis out;
    out.config = config;
    const auto ids = corpus.store.ids_alerts();
    for (const auto& host : corpus.store.hosts())
        out.roles.push_back(analyze_host(host, corpus.store.events_for_host(host), ids, config));
    out.graph = build_scenario(out.roles, config, ids);
    return out;
}

}  // namespace wormtrace
