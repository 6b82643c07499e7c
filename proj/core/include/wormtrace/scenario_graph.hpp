#pragma once

/// @file scenario_graph.hpp
/// @brief Fuses per-host matches into a directed attack-propagation graph.
///
/// An edge A -> B means A attacked B. Evidence for the same (A, B) pair from
/// A's outbound sequences, B's inbound sequences and IDS "TFTP Get" alerts is
/// merged when the t135 values fall within stage_window of each other.

#include "wormtrace/classifier.hpp"

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace wormtrace {

enum class EvidenceSource { VictimLog, AttackerLog, Ids };

std::string_view to_string(EvidenceSource source);

/// Stage order, comma-separated: {69, 135, 4444} -> "135,4444,69".
std::string format_ports(const PortSet& ports);

struct Edge {
    Ipv4 from;
    Ipv4 to;
    PortSet ports_reached;
    Timestamp first_seen;
    std::set<EvidenceSource> evidence_sources;
    std::vector<std::string> anomalies;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct ScenarioGraph {
    std::vector<HostRole> nodes;
    /// Ordered by first_seen, then (from, to).
    std::vector<Edge> edges;
    /// Addresses seen as peers or in IDS alerts that are not corpus hosts, ascending.
    std::vector<Ipv4> unattributed_peers;

    const HostRole* node_for(Ipv4 ip) const;

    friend bool operator==(const ScenarioGraph&, const ScenarioGraph&) = default;
};

ScenarioGraph build_scenario(std::vector<HostRole> roles, const MatchConfig& cfg,
                             const std::vector<IdsAlert>& ids = {});

std::vector<std::pair<Timestamp, Edge>> topological_timeline(const ScenarioGraph& graph);

struct DotOptions {
    /// A source with more {135}-only edges than this renders them as one summary node.
    std::size_t scan_fanout_threshold = 10;
};

/// DOT digraph named "scenario". Nodes are quoted host names (or addresses
/// for unattributed peers) labeled "name (ip) [role]"; the origin node is
/// drawn with peripheries=2 and style=bold. Edge labels list ports in stage
/// order (135,4444,69).
std::string render_dot(const ScenarioGraph& graph, const DotOptions& options = {});

}  // namespace wormtrace
