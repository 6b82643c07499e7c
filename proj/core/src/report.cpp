#include "wormtrace/report.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>

namespace wormtrace {

using nlohmann::json;

namespace {

std::string stamp(const Timestamp& t) { return t.iso_micros(); }

std::optional<std::string> stamp(const std::optional<Timestamp>& t) {
    if (!t) return std::nullopt;
    return stamp(*t);
}

std::vector<std::uint16_t> stage_ordered(const PortSet& ports) {
    std::vector<std::uint16_t> out;
    for (auto p : {kRpcPort, kShellPort, kTftpPort})
        if (ports.contains(p)) out.push_back(p);
    for (auto p : ports)
        if (p != kRpcPort && p != kShellPort && p != kTftpPort) out.push_back(p);
    return out;
}

SequenceDigest digest(const ExploitSequence& s) {
    return {s.peer.to_string(), stage_ordered(s.ports_reached()), stamp(s.t135), stamp(s.t4444), stamp(s.t69)};
}

ProcessDigest digest(const SecurityEvent& ev) {
    return {stamp(ev.ts), ev.image_file_name.value_or(""), ev.user};
}

// JSON helpers: optional values are written as null and read back as nullopt.

template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

json to_j(const SequenceDigest& s) {
    return {{"peer", s.peer}, {"ports", s.ports}, {"t135", s.t135}, {"t4444", opt(s.t4444)}, {"t69", opt(s.t69)}};
}

json to_j(const ProcessDigest& p) { return {{"time", p.time}, {"image", p.image}, {"user", p.user}}; }

json to_j(const std::optional<ProcessDigest>& p) { return p ? to_j(*p) : json(nullptr); }

template <class T>
std::optional<T> opt_from(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    return v.get<T>();
}

SequenceDigest seq_from(const json& j) {
    return {j.at("peer").get<std::string>(), j.at("ports").get<std::vector<std::uint16_t>>(),
            j.at("t135").get<std::string>(), opt_from<std::string>(j, "t4444"), opt_from<std::string>(j, "t69")};
}

ProcessDigest proc_from(const json& j) {
    return {j.at("time").get<std::string>(), j.at("image").get<std::string>(), j.at("user").get<std::string>()};
}

std::optional<ProcessDigest> opt_proc_from(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    return proc_from(v);
}

std::string padded(std::string text, std::size_t width) {
    if (text.size() < width) text.append(width - text.size(), ' ');
    return text;
}

std::string ports_text(const std::vector<std::uint16_t>& ports) {
    std::string out;
    for (auto p : ports) {
        if (!out.empty()) out += ',';
        out += std::to_string(p);
    }
    return out;
}

Timestamp parse_stamp(const std::string& text) {
    auto ts = Timestamp::parse_iso(text);
    if (!ts) throw Error("report: bad timestamp '" + text + "'");
    return *ts;
}

Ipv4 parse_ip(const std::string& text) {
    auto ip = Ipv4::parse(text);
    if (!ip) throw Error("report: bad address '" + text + "'");
    return *ip;
}

}  // namespace

AnalysisReport make_report(const Corpus& corpus, const Analysis& analysis) {
    AnalysisReport r;
    const auto& cfg = analysis.config;
    r.config = {cfg.stage_window.count(),
                cfg.ids_skew.count(),
                corpus.ids_year,
                {cfg.worm_binaries.begin(), cfg.worm_binaries.end()},
                {cfg.loader_binaries.begin(), cfg.loader_binaries.end()},
                {cfg.system_accounts.begin(), cfg.system_accounts.end()}};

    r.corpus.hosts = corpus.manifest.hosts.size();
    r.corpus.events = corpus.store.size();
    for (const auto& f : corpus.files) {
        r.corpus.sources.push_back({f.path, f.host, f.ids ? "ids" : std::string(to_string(f.kind)), f.events,
                                    f.skipped.size()});
        if (f.ids) r.corpus.ids_alerts += f.events;
    }

    for (const auto& node : analysis.graph.nodes) {
        HostReport h;
        h.name = node.host.name;
        h.ip = node.host.ip.to_string();
        h.role = std::string(to_string(node.role));
        h.origin = node.origin;
        h.anomalies = node.anomalies;
        for (const auto& v : node.evidence.victim) {
            VictimDigest d;
            d.sequence = digest(v.sequence);
            d.completeness = std::string(to_string(v.completeness));
            for (const auto& ev : v.impact_592) d.impact_592.push_back(digest(ev));
            if (v.impact_7031) d.impact_7031 = stamp(v.impact_7031->ts);
            if (v.impact_1074) d.impact_1074 = stamp(v.impact_1074->ts);
            if (v.ids_tftp_get) d.ids_tftp_get = stamp(v.ids_tftp_get->ts);
            if (v.completeness == Completeness::Full) d.infection_time = stamp(v.infection_time());
            h.victim.push_back(std::move(d));
        }
        if (const auto& a = node.evidence.attacker) {
            AttackerDigest d;
            for (const auto& s : a->sequences) d.sequences.push_back(digest(s));
            if (a->activation_592) d.activation_592 = digest(*a->activation_592);
            if (a->ids_portsweep) d.ids_portsweep = stamp(a->ids_portsweep->ts);
            h.attacker = std::move(d);
        }
        if (const auto& m = node.evidence.multistep) {
            MultiStepDigest d{stamp(m->as_victim.infection_time()), stamp(m->as_attacker.first_outbound()),
                              std::nullopt};
            if (m->relay_592) d.relay_592 = digest(*m->relay_592);
            h.multistep = std::move(d);
        }
        for (const auto& a : node.anomalies) r.anomalies.push_back(a);
        r.hosts.push_back(std::move(h));
    }

    auto name_of = [&](Ipv4 ip) -> std::optional<std::string> {
        if (const auto* n = analysis.graph.node_for(ip)) return n->host.name;
        return std::nullopt;
    };
    for (const auto& [when, e] : topological_timeline(analysis.graph)) {
        EdgeReport er;
        er.from = e.from.to_string();
        er.to = e.to.to_string();
        er.from_host = name_of(e.from);
        er.to_host = name_of(e.to);
        er.ports = stage_ordered(e.ports_reached);
        er.first_seen = stamp(when);
        for (auto s : e.evidence_sources) er.evidence.emplace_back(to_string(s));
        er.anomalies = e.anomalies;
        for (const auto& a : e.anomalies) r.anomalies.push_back(er.from + " -> " + er.to + ": " + a);
        r.edges.push_back(std::move(er));
    }
    for (auto ip : analysis.graph.unattributed_peers) r.unattributed_peers.push_back(ip.to_string());
    return r;
}

std::string report_to_json(const AnalysisReport& r) {
    json j;
    j["schema_version"] = r.schema_version;
    j["tool"] = r.tool;
    j["version"] = r.version;
    j["config"] = {{"stage_window_s", r.config.stage_window_s},   {"ids_skew_s", r.config.ids_skew_s},
                   {"ids_year", r.config.ids_year},               {"worm_binaries", r.config.worm_binaries},
                   {"loader_binaries", r.config.loader_binaries}, {"system_accounts", r.config.system_accounts}};
    json sources = json::array();
    for (const auto& s : r.corpus.sources)
        sources.push_back(
            {{"path", s.path}, {"host", s.host}, {"kind", s.kind}, {"events", s.events}, {"skipped", s.skipped}});
    j["corpus"] = {
        {"hosts", r.corpus.hosts}, {"events", r.corpus.events}, {"ids_alerts", r.corpus.ids_alerts}, {"sources", sources}};

    j["hosts"] = json::array();
    for (const auto& h : r.hosts) {
        json victim = json::array();
        for (const auto& v : h.victim) {
            json impacts = json::array();
            for (const auto& p : v.impact_592) impacts.push_back(to_j(p));
            victim.push_back({{"sequence", to_j(v.sequence)},
                              {"completeness", v.completeness},
                              {"impact_592", impacts},
                              {"impact_7031", opt(v.impact_7031)},
                              {"impact_1074", opt(v.impact_1074)},
                              {"ids_tftp_get", opt(v.ids_tftp_get)},
                              {"infection_time", opt(v.infection_time)}});
        }
        json attacker = nullptr;
        if (h.attacker) {
            json seqs = json::array();
            for (const auto& s : h.attacker->sequences) seqs.push_back(to_j(s));
            attacker = {{"sequences", seqs},
                        {"activation_592", to_j(h.attacker->activation_592)},
                        {"ids_portsweep", opt(h.attacker->ids_portsweep)}};
        }
        json multi = nullptr;
        if (h.multistep)
            multi = {{"infection_time", h.multistep->infection_time},
                     {"first_outbound", h.multistep->first_outbound},
                     {"relay_592", to_j(h.multistep->relay_592)}};
        j["hosts"].push_back({{"name", h.name},
                              {"ip", h.ip},
                              {"role", h.role},
                              {"origin", h.origin},
                              {"anomalies", h.anomalies},
                              {"evidence", {{"victim", victim}, {"attacker", attacker}, {"multistep", multi}}}});
    }

    j["edges"] = json::array();
    for (const auto& e : r.edges)
        j["edges"].push_back({{"from", e.from},
                              {"to", e.to},
                              {"from_host", opt(e.from_host)},
                              {"to_host", opt(e.to_host)},
                              {"ports", e.ports},
                              {"first_seen", e.first_seen},
                              {"evidence", e.evidence},
                              {"anomalies", e.anomalies}});
    j["unattributed_peers"] = r.unattributed_peers;
    j["anomalies"] = r.anomalies;
    return j.dump(2) + "\n";
}

AnalysisReport report_from_json(std::string_view text) {
    AnalysisReport r;
    try {
        const json j = json::parse(text);
        r.schema_version = j.at("schema_version").get<int>();
        if (r.schema_version != kReportSchemaVersion)
            throw Error("report: unsupported schema_version " + std::to_string(r.schema_version));
        r.tool = j.at("tool").get<std::string>();
        r.version = j.at("version").get<std::string>();

        const auto& c = j.at("config");
        r.config = {c.at("stage_window_s").get<std::int64_t>(),
                    c.at("ids_skew_s").get<std::int64_t>(),
                    c.at("ids_year").get<int>(),
                    c.at("worm_binaries").get<std::vector<std::string>>(),
                    c.at("loader_binaries").get<std::vector<std::string>>(),
                    c.at("system_accounts").get<std::vector<std::string>>()};

        const auto& cs = j.at("corpus");
        r.corpus.hosts = cs.at("hosts").get<std::uint64_t>();
        r.corpus.events = cs.at("events").get<std::uint64_t>();
        r.corpus.ids_alerts = cs.at("ids_alerts").get<std::uint64_t>();
        for (const auto& s : cs.at("sources"))
            r.corpus.sources.push_back({s.at("path").get<std::string>(), s.at("host").get<std::string>(),
                                        s.at("kind").get<std::string>(), s.at("events").get<std::uint64_t>(),
                                        s.at("skipped").get<std::uint64_t>()});

        for (const auto& hj : j.at("hosts")) {
            HostReport h;
            h.name = hj.at("name").get<std::string>();
            h.ip = hj.at("ip").get<std::string>();
            h.role = hj.at("role").get<std::string>();
            h.origin = hj.at("origin").get<bool>();
            h.anomalies = hj.at("anomalies").get<std::vector<std::string>>();
            const auto& ev = hj.at("evidence");
            for (const auto& vj : ev.at("victim")) {
                VictimDigest v;
                v.sequence = seq_from(vj.at("sequence"));
                v.completeness = vj.at("completeness").get<std::string>();
                for (const auto& p : vj.at("impact_592")) v.impact_592.push_back(proc_from(p));
                v.impact_7031 = opt_from<std::string>(vj, "impact_7031");
                v.impact_1074 = opt_from<std::string>(vj, "impact_1074");
                v.ids_tftp_get = opt_from<std::string>(vj, "ids_tftp_get");
                v.infection_time = opt_from<std::string>(vj, "infection_time");
                h.victim.push_back(std::move(v));
            }
            if (const auto& aj = ev.at("attacker"); !aj.is_null()) {
                AttackerDigest a;
                for (const auto& s : aj.at("sequences")) a.sequences.push_back(seq_from(s));
                a.activation_592 = opt_proc_from(aj, "activation_592");
                a.ids_portsweep = opt_from<std::string>(aj, "ids_portsweep");
                h.attacker = std::move(a);
            }
            if (const auto& mj = ev.at("multistep"); !mj.is_null())
                h.multistep = MultiStepDigest{mj.at("infection_time").get<std::string>(),
                                              mj.at("first_outbound").get<std::string>(),
                                              opt_proc_from(mj, "relay_592")};
            r.hosts.push_back(std::move(h));
        }

        for (const auto& ej : j.at("edges"))
            r.edges.push_back({ej.at("from").get<std::string>(), ej.at("to").get<std::string>(),
                               opt_from<std::string>(ej, "from_host"), opt_from<std::string>(ej, "to_host"),
                               ej.at("ports").get<std::vector<std::uint16_t>>(), ej.at("first_seen").get<std::string>(),
                               ej.at("evidence").get<std::vector<std::string>>(),
                               ej.at("anomalies").get<std::vector<std::string>>()});
        r.unattributed_peers = j.at("unattributed_peers").get<std::vector<std::string>>();
        r.anomalies = j.at("anomalies").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw Error(std::string("report: ") + e.what());
    }
    return r;
}

std::string render_summary(const AnalysisReport& r) {
    std::size_t name_w = 4, role_w = 4;
    for (const auto& h : r.hosts) {
        name_w = std::max(name_w, h.name.size());
        role_w = std::max(role_w, h.role.size() + (h.origin ? 9 : 0));
    }
    std::string out = "Hosts (" + std::to_string(r.hosts.size()) + ")\n";
    out += "  " + padded("HOST", name_w) + "  " + padded("IP", 15) + "  " + padded("ROLE", role_w) + "  ANOMALIES\n";
    for (const auto& h : r.hosts)
        out += "  " + padded(h.name, name_w) + "  " + padded(h.ip, 15) + "  " +
               padded(h.role + (h.origin ? " (origin)" : ""), role_w) + "  " + std::to_string(h.anomalies.size()) +
               "\n";

    // Scan-only edges dominate a sweep; they are counted, not listed.
    std::size_t scan_only = 0;
    out += "\nTimeline (" + std::to_string(r.edges.size()) + " edges)\n";
    for (const auto& e : r.edges) {
        if (e.ports == std::vector<std::uint16_t>{kRpcPort}) {
            ++scan_only;
            continue;
        }
        out += "  " + e.first_seen.substr(0, 19) + "  " + e.from_host.value_or(e.from) + " -> " +
               e.to_host.value_or(e.to) + "  [" + ports_text(e.ports) + "]\n";
    }
    if (scan_only) out += "  plus " + std::to_string(scan_only) + " scan-only edges [135]\n";

    if (!r.unattributed_peers.empty())
        out += "\nUnattributed peers: " + std::to_string(r.unattributed_peers.size()) + "\n";
    if (!r.anomalies.empty()) {
        out += "\nAnomalies (" + std::to_string(r.anomalies.size()) + ")\n";
        for (const auto& a : r.anomalies) out += "  " + a + "\n";
    }
    return out;
}

ScenarioGraph graph_from_report(const AnalysisReport& r) {
    ScenarioGraph g;
    for (const auto& h : r.hosts) {
        HostRole node;
        node.host = {h.name, parse_ip(h.ip)};
        auto role = parse_role(h.role);
        if (!role) throw Error("report: unknown role '" + h.role + "'");
        node.role = *role;
        node.origin = h.origin;
        node.anomalies = h.anomalies;
        g.nodes.push_back(std::move(node));
    }
    for (const auto& e : r.edges) {
        Edge edge{parse_ip(e.from), parse_ip(e.to), {e.ports.begin(), e.ports.end()}, parse_stamp(e.first_seen), {}, e.anomalies};
        for (const auto& s : e.evidence) {
            for (auto src : {EvidenceSource::VictimLog, EvidenceSource::AttackerLog, EvidenceSource::Ids})
                if (to_string(src) == s) edge.evidence_sources.insert(src);
        }
        g.edges.push_back(std::move(edge));
    }
    for (const auto& ip : r.unattributed_peers) g.unattributed_peers.push_back(parse_ip(ip));
    return g;
}

std::string event_to_json(const NormalizedEvent& any) {
    json j;
    std::visit(
        [&](const auto& ev) {
            using T = std::decay_t<decltype(ev)>;
            if constexpr (std::is_same_v<T, FirewallEvent>) {
                j = {{"type", "firewall"},
                     {"host", ev.host.name},
                     {"ts", stamp(ev.ts)},
                     {"action", ev.action == FirewallAction::Other ? ev.action_text : std::string(to_string(ev.action))},
                     {"protocol",
                      ev.protocol == TransportProtocol::Other ? ev.protocol_text : std::string(to_string(ev.protocol))},
                     {"src_ip", ev.src_ip.to_string()},
                     {"dst_ip", ev.dst_ip.to_string()},
                     {"src_port", ev.src_port},
                     {"dst_port", ev.dst_port}};
            } else if constexpr (std::is_same_v<T, IdsAlert>) {
                std::string proto = ev.protocol.kind == IdsProtocol::Kind::Tcp   ? "TCP"
                                    : ev.protocol.kind == IdsProtocol::Kind::Udp ? "UDP"
                                                                                 : "PROTO:" + std::to_string(ev.protocol.number);
                j = {{"type", "ids"},
                     {"ts", stamp(ev.ts)},
                     {"sig", std::to_string(ev.sig.gid) + ":" + std::to_string(ev.sig.sid) + ":" +
                                 std::to_string(ev.sig.rev)},
                     {"message", ev.message},
                     {"classification", opt(ev.classification)},
                     {"priority", ev.priority ? json(int{*ev.priority}) : json(nullptr)},
                     {"src_ip", ev.src_ip.to_string()},
                     {"src_port", opt(ev.src_port)},
                     {"dst_ip", ev.dst_ip.to_string()},
                     {"dst_port", opt(ev.dst_port)},
                     {"protocol", proto}};
            } else {
                j = {{"host", ev.host.name},       {"ts", stamp(ev.ts)},          {"source", ev.source},
                     {"event_type", ev.type},      {"category", ev.category},     {"event_id", ev.event_id},
                     {"user", ev.user},            {"computer", ev.computer},     {"message", ev.raw_message}};
                if constexpr (std::is_same_v<T, SecurityEvent>) {
                    j["type"] = "security";
                    j["image_file_name"] = opt(ev.image_file_name);
                    j["new_process_id"] = opt(ev.new_process_id);
                    j["creator_process_id"] = opt(ev.creator_process_id);
                    j["user_name"] = opt(ev.user_name);
                    j["domain"] = opt(ev.domain);
                    j["logon_id"] = opt(ev.logon_id);
                } else {
                    j["type"] = std::string(to_string(ev.kind));
                }
            }
        },
        any);
    return j.dump();
}

}  // namespace wormtrace
