#include "wormtrace/scenario_graph.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace wormtrace {

namespace {

struct Contribution {
    Ipv4 from;
    Ipv4 to;
    Timestamp t135;
    PortSet ports;
    EvidenceSource source;
    bool ids_corroborated = false;
};

struct EdgeBuilder {
    Edge edge;
    std::map<EvidenceSource, PortSet> per_source;
};

std::string quoted(std::string_view id) {
    std::string out = "\"";
    for (char c : id) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

std::string set_text(const PortSet& ports) { return "{" + format_ports(ports) + "}"; }

}  // namespace

std::string_view to_string(EvidenceSource source) {
    switch (source) {
        case EvidenceSource::VictimLog: return "VictimLog";
        case EvidenceSource::AttackerLog: return "AttackerLog";
        case EvidenceSource::Ids: return "Ids";
    }
    return "Ids";
}

std::string format_ports(const PortSet& ports) {
    std::string out;
    for (auto port : {kRpcPort, kShellPort, kTftpPort}) {
        if (!ports.contains(port)) continue;
        if (!out.empty()) out += ',';
        out += std::to_string(port);
    }
    for (auto port : ports) {
        if (port == kRpcPort || port == kShellPort || port == kTftpPort) continue;
        if (!out.empty()) out += ',';
        out += std::to_string(port);
    }
    return out;
}

const HostRole* ScenarioGraph::node_for(Ipv4 ip) const {
    for (const auto& node : nodes)
        if (node.host.ip == ip) return &node;
    return nullptr;
}

ScenarioGraph build_scenario(std::vector<HostRole> roles, const MatchConfig& cfg, const std::vector<IdsAlert>& ids) {
    ScenarioGraph graph;
    graph.nodes = std::move(roles);

    std::vector<Contribution> contributions;
    for (const auto& node : graph.nodes) {
        const auto& ev = node.evidence;
        if (ev.attacker)
            for (const auto& seq : ev.attacker->sequences)
                contributions.push_back({node.host.ip, seq.peer, seq.t135, seq.ports_reached(),
                                         EvidenceSource::AttackerLog});
        for (const auto& v : ev.victim)
            contributions.push_back({v.sequence.peer, node.host.ip, v.sequence.t135, v.sequence.ports_reached(),
                                     EvidenceSource::VictimLog, v.ids_tftp_get.has_value()});
    }
    std::stable_sort(contributions.begin(), contributions.end(), [](const Contribution& a, const Contribution& b) {
        return std::tie(a.t135, a.from, a.to, a.source) < std::tie(b.t135, b.from, b.to, b.source);
    });

    // Contributions arrive in t135 order, so only the newest edge of a pair can absorb one.
    std::vector<EdgeBuilder> builders;
    std::map<std::pair<Ipv4, Ipv4>, std::size_t> newest;
    for (const auto& c : contributions) {
        if (c.from == c.to) continue;
        const auto key = std::make_pair(c.from, c.to);
        auto it = newest.find(key);
        if (it == newest.end() || c.t135 - builders[it->second].edge.first_seen > cfg.stage_window) {
            newest[key] = builders.size();
            builders.push_back({Edge{c.from, c.to, {}, c.t135, {}, {}}, {}});
        }
        auto& b = builders[newest[key]];
        b.edge.ports_reached.insert(c.ports.begin(), c.ports.end());
        b.edge.first_seen = std::min(b.edge.first_seen, c.t135);
        b.edge.evidence_sources.insert(c.source);
        if (c.ids_corroborated) b.edge.evidence_sources.insert(EvidenceSource::Ids);
        b.per_source[c.source].insert(c.ports.begin(), c.ports.end());
    }

    for (auto& b : builders) {
        auto victim = b.per_source.find(EvidenceSource::VictimLog);
        auto attacker = b.per_source.find(EvidenceSource::AttackerLog);
        if (victim != b.per_source.end() && attacker != b.per_source.end() && victim->second != attacker->second)
            b.edge.anomalies.push_back("ports mismatch: victim log " + set_text(victim->second) + " vs attacker log " +
                                       set_text(attacker->second));
        graph.edges.push_back(std::move(b.edge));
    }
    std::stable_sort(graph.edges.begin(), graph.edges.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.first_seen, a.from, a.to) < std::tie(b.first_seen, b.from, b.to);
    });

    std::set<Ipv4> unattributed;
    auto consider = [&](Ipv4 ip) {
        if (!graph.node_for(ip)) unattributed.insert(ip);
    };
    for (const auto& e : graph.edges) {
        consider(e.from);
        consider(e.to);
    }
    for (const auto& alert : ids) {
        consider(alert.src_ip);
        consider(alert.dst_ip);
    }
    graph.unattributed_peers.assign(unattributed.begin(), unattributed.end());
    return graph;
}

std::vector<std::pair<Timestamp, Edge>> topological_timeline(const ScenarioGraph& graph) {
    std::vector<std::pair<Timestamp, Edge>> out;
    out.reserve(graph.edges.size());
    for (const auto& e : graph.edges) out.emplace_back(e.first_seen, e);
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::tie(a.first, a.second.from, a.second.to) < std::tie(b.first, b.second.from, b.second.to);
    });
    return out;
}

std::string render_dot(const ScenarioGraph& graph, const DotOptions& options) {
    auto node_id = [&](Ipv4 ip) {
        const HostRole* node = graph.node_for(ip);
        return node ? node->host.name : ip.to_string();
    };

    const PortSet scan_only{kRpcPort};
    std::map<Ipv4, std::size_t> scan_edges;
    for (const auto& e : graph.edges)
        if (e.ports_reached == scan_only) ++scan_edges[e.from];
    auto compressed = [&](const Edge& e) {
        return e.ports_reached == scan_only && scan_edges[e.from] > options.scan_fanout_threshold;
    };

    std::set<Ipv4> referenced;
    for (const auto& e : graph.edges) {
        referenced.insert(e.from);
        if (!compressed(e)) referenced.insert(e.to);
    }

    std::string out = "digraph scenario {\n";
    for (const auto& node : graph.nodes) {
        out += "  " + quoted(node.host.name) + " [label=" +
               quoted(node.host.name + " (" + node.host.ip.to_string() + ") [" + std::string(to_string(node.role)) +
                      "]");
        if (node.origin) out += ", peripheries=2, style=bold";
        out += "];\n";
    }
    for (const auto& ip : graph.unattributed_peers) {
        if (!referenced.contains(ip)) continue;
        out += "  " + quoted(ip.to_string()) + " [label=" + quoted(ip.to_string() + " [unattributed]") +
               ", shape=box];\n";
    }
    for (const auto& [from, count] : scan_edges) {
        if (count <= options.scan_fanout_threshold) continue;
        const auto id = node_id(from) + " scans";
        out += "  " + quoted(id) + " [label=" + quoted(std::to_string(count) + " addresses scanned (135)") +
               ", shape=note];\n";
        out += "  " + quoted(node_id(from)) + " -> " + quoted(id) + " [label=\"135\", style=dashed];\n";
    }
    for (const auto& e : graph.edges) {
        if (compressed(e)) continue;
        out += "  " + quoted(node_id(e.from)) + " -> " + quoted(node_id(e.to)) + " [label=" +
               quoted(format_ports(e.ports_reached)) + "];\n";
    }
    out += "}\n";
    return out;
}

}  // namespace wormtrace
