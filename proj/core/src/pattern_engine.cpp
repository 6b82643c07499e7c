#include "wormtrace/pattern_engine.hpp"

#include <algorithm>
#include <map>

namespace wormtrace {

namespace {

bool contains_lower(const std::set<std::string>& names, const std::string& lowered) {
    return std::any_of(names.begin(), names.end(), [&](const std::string& n) { return to_lower(n) == lowered; });
}

/// Stage index 1..3 of a firewall event for the given perspective, or 0.
int stage_of(const FirewallEvent& ev, Direction direction) {
    const bool inbound = direction == Direction::Inbound;
    const auto tcp_action = inbound ? FirewallAction::OpenInbound : FirewallAction::Open;
    const auto udp_action = inbound ? FirewallAction::Open : FirewallAction::OpenInbound;
    if (ev.protocol == TransportProtocol::Tcp && ev.action == tcp_action) {
        if (ev.dst_port == kRpcPort) return 1;
        if (ev.dst_port == kShellPort) return 2;
    }
    if (ev.protocol == TransportProtocol::Udp && ev.action == udp_action && ev.dst_port == kTftpPort) return 3;
    return 0;
}

/// Remote side under the OPEN / OPEN-INBOUND convention.
Ipv4 remote_of(const FirewallEvent& ev) {
    return ev.action == FirewallAction::OpenInbound ? ev.src_ip : ev.dst_ip;
}

bool within(Timestamp t, Timestamp start, std::chrono::seconds window) {
    return t >= start && t - start <= window;
}

bool near(Timestamp a, Timestamp b, std::chrono::seconds skew) {
    const auto d = a - b;
    return d <= skew && -d <= skew;
}

}  // namespace

PortSet ExploitSequence::ports_reached() const {
    PortSet ports{kRpcPort};
    if (t4444) ports.insert(kShellPort);
    if (t69) ports.insert(kTftpPort);
    return ports;
}

std::string_view to_string(Completeness c) {
    switch (c) {
        case Completeness::Full: return "Full";
        case Completeness::Transferred: return "Transferred";
        case Completeness::PortsOnly: return "PortsOnly";
    }
    return "PortsOnly";
}

Timestamp VictimMatch::infection_time() const {
    const Timestamp t = sequence.t69.value_or(sequence.t135);
    return worm_launch ? std::max(t, *worm_launch) : t;
}

void MatchConfig::validate() const {
    if (stage_window.count() <= 0) throw Error("stage_window must be positive");
    if (ids_skew.count() <= 0) throw Error("ids_skew must be positive");
}

bool MatchConfig::is_worm_binary(std::string_view path) const {
    return contains_lower(worm_binaries, path_basename_lower(path));
}

bool MatchConfig::is_loader_binary(std::string_view path) const {
    return contains_lower(loader_binaries, path_basename_lower(path));
}

bool MatchConfig::is_system_account(std::string_view user) const {
    return system_accounts.contains(std::string(user));
}

bool is_tftp_get(const IdsAlert& alert) {
    return to_lower(alert.message) == "tftp get";
}

bool is_portsweep(const IdsAlert& alert) {
    return to_lower(alert.message).find("portsweep") != std::string::npos;
}

std::vector<ExploitSequence> extract_sequences(const std::vector<NormalizedEvent>& events, Direction direction,
                                               const MatchConfig& cfg) {
    std::vector<ExploitSequence> out;
    std::map<Ipv4, std::size_t> latest;  // peer -> index of its most recent sequence

    for (const auto& any : events) {
        const auto* ev = std::get_if<FirewallEvent>(&any);
        if (!ev) continue;
        const int stage = stage_of(*ev, direction);
        if (stage == 0) continue;
        const Ipv4 peer = remote_of(*ev);

        if (stage == 1) {
            latest[peer] = out.size();
            out.push_back(ExploitSequence{peer, direction, ev->ts, std::nullopt, std::nullopt});
            continue;
        }
        auto it = latest.find(peer);
        if (it == latest.end()) continue;
        auto& seq = out[it->second];
        if (!within(ev->ts, seq.t135, cfg.stage_window)) continue;
        if (stage == 2 && !seq.t4444) {
            seq.t4444 = ev->ts;
        } else if (stage == 3 && seq.t4444 && !seq.t69) {
            seq.t69 = ev->ts;
        }
    }
    return out;
}

std::vector<VictimMatch> match_victim(const HostId& host, const std::vector<NormalizedEvent>& events,
                                      const std::vector<IdsAlert>& ids, const MatchConfig& cfg) {
    std::vector<VictimMatch> out;
    for (const auto& seq : extract_sequences(events, Direction::Inbound, cfg)) {
        VictimMatch m{host, seq, {}, std::nullopt, std::nullopt, std::nullopt, Completeness::PortsOnly, std::nullopt};

        for (const auto& any : events) {
            if (const auto* sec = std::get_if<SecurityEvent>(&any)) {
                if (sec->event_id != 592 || !sec->image_file_name) continue;
                if (!within(sec->ts, seq.t135, cfg.stage_window) || !cfg.is_system_account(sec->user)) continue;
                const bool worm = cfg.is_worm_binary(*sec->image_file_name);
                if (worm || cfg.is_loader_binary(*sec->image_file_name)) {
                    m.impact_592.push_back(*sec);
                    if (worm && !m.worm_launch) m.worm_launch = sec->ts;
                }
            } else if (const auto* sys = std::get_if<SystemEvent>(&any)) {
                if (sys->kind != EventLogKind::System || !within(sys->ts, seq.t135, cfg.stage_window)) continue;
                if (sys->event_id == 7031 && !m.impact_7031) m.impact_7031 = *sys;
                if (sys->event_id == 1074 && !m.impact_1074) m.impact_1074 = *sys;
            }
        }

        if (seq.t69) {
            for (const auto& alert : ids) {
                if (is_tftp_get(alert) && alert.src_ip == host.ip && alert.dst_ip == seq.peer &&
                    alert.dst_port == kTftpPort && near(alert.ts, *seq.t69, cfg.ids_skew)) {
                    m.ids_tftp_get = alert;
                    break;
                }
            }
            m.completeness = m.worm_launch ? Completeness::Full : Completeness::Transferred;
        }
        out.push_back(std::move(m));
    }
    return out;
}

std::optional<AttackerMatch> match_attacker(const HostId& host, const std::vector<NormalizedEvent>& events,
                                            const std::vector<IdsAlert>& ids, const MatchConfig& cfg) {
    auto sequences = extract_sequences(events, Direction::Outbound, cfg);
    if (sequences.empty()) return std::nullopt;

    AttackerMatch m{host, std::move(sequences), std::nullopt, std::nullopt};
    const Timestamp first = m.first_outbound();
    for (const auto& any : events) {
        const auto* sec = std::get_if<SecurityEvent>(&any);
        if (!sec || sec->event_id != 592 || !sec->image_file_name) continue;
        if (sec->ts > first) break;
        if (!cfg.is_system_account(sec->user) && cfg.is_worm_binary(*sec->image_file_name)) {
            m.activation_592 = *sec;
            break;
        }
    }
    for (const auto& alert : ids) {
        if (is_portsweep(alert) && alert.src_ip == host.ip) {
            m.ids_portsweep = alert;
            break;
        }
    }
    return m;
}

const VictimMatch* earliest_full(const std::vector<VictimMatch>& victim) {
    const VictimMatch* best = nullptr;
    for (const auto& v : victim) {
        if (v.completeness != Completeness::Full) continue;
        if (!best || v.infection_time() < best->infection_time()) best = &v;
    }
    return best;
}

std::optional<MultiStepMatch> match_multistep(const HostId& host, const std::vector<VictimMatch>& victim,
                                              const std::optional<AttackerMatch>& attacker) {
    const VictimMatch* infected = earliest_full(victim);
    if (!infected || !attacker) return std::nullopt;
    const Timestamp infection = infected->infection_time();
    if (infection > attacker->first_outbound()) return std::nullopt;

    MultiStepMatch m{host, *infected, *attacker, std::nullopt};
    if (attacker->activation_592 && attacker->activation_592->ts >= infection) m.relay_592 = attacker->activation_592;
    return m;
}

}  // namespace wormtrace
