#include "wormtrace/classifier.hpp"

#include <algorithm>
#include <array>

namespace wormtrace {

namespace {

constexpr std::array<std::pair<Role, std::string_view>, 6> kRoleNames{{
    {Role::Clean, "Clean"},
    {Role::Scanned, "Scanned"},
    {Role::PartiallyExploited, "PartiallyExploited"},
    {Role::Victim, "Victim"},
    {Role::Attacker, "Attacker"},
    {Role::MultiStep, "MultiStep"},
}};

}  // namespace

std::string_view to_string(Role role) {
    for (const auto& [r, name] : kRoleNames)
        if (r == role) return name;
    return "Clean";
}

std::optional<Role> parse_role(std::string_view text) {
    for (const auto& [r, name] : kRoleNames)
        if (name == text) return r;
    return std::nullopt;
}

IpRole infer_ip_roles(const FirewallEvent& ev) {
    switch (ev.action) {
        case FirewallAction::Open: return {ev.src_ip, ev.dst_ip};
        case FirewallAction::OpenInbound: return {ev.dst_ip, ev.src_ip};
        default: break;
    }
    throw NotApplicable("no ip roles for firewall action " +
                        std::string(ev.action == FirewallAction::Other ? ev.action_text : to_string(ev.action)));
}

std::vector<std::string> audit_host_ip(const HostId& host, const std::vector<NormalizedEvent>& events) {
    std::vector<std::string> out;
    for (const auto& any : events) {
        const auto* ev = std::get_if<FirewallEvent>(&any);
        if (!ev || (ev->action != FirewallAction::Open && ev->action != FirewallAction::OpenInbound)) continue;
        const auto roles = infer_ip_roles(*ev);
        if (roles.local == host.ip) continue;
        out.push_back(host.name + ": " + ev->ts.iso() + " " + std::string(to_string(ev->action)) + " " +
                      ev->src_ip.to_string() + ":" + std::to_string(ev->src_port) + " -> " +
                      ev->dst_ip.to_string() + ":" + std::to_string(ev->dst_port) + " has local side " +
                      roles.local.to_string() + ", expected " + host.ip.to_string());
    }
    return out;
}

HostRole classify_host(const HostId& host, std::vector<VictimMatch> victim, std::optional<AttackerMatch> attacker,
                       std::optional<MultiStepMatch> multi) {
    HostRole out;
    out.host = host;

    const VictimMatch* full = earliest_full(victim);
    const bool reached_shell = std::any_of(victim.begin(), victim.end(), [](const VictimMatch& v) {
        return v.sequence.t4444.has_value();
    });

    if (multi) {
        out.role = Role::MultiStep;
    } else if (attacker) {
        out.role = Role::Attacker;
        out.origin = !full || full->infection_time() > attacker->first_outbound();
    } else if (full) {
        out.role = Role::Victim;
    } else if (reached_shell) {
        out.role = Role::PartiallyExploited;
    } else if (!victim.empty()) {
        out.role = Role::Scanned;
    }

    out.evidence = HostEvidence{std::move(victim), std::move(attacker), std::move(multi)};
    return out;
}

HostRole analyze_host(const HostId& host, const std::vector<NormalizedEvent>& events,
                      const std::vector<IdsAlert>& ids, const MatchConfig& cfg) {
    auto victim = match_victim(host, events, ids, cfg);
    auto attacker = match_attacker(host, events, ids, cfg);
    auto multi = match_multistep(host, victim, attacker);
    auto role = classify_host(host, std::move(victim), std::move(attacker), std::move(multi));
    role.anomalies = audit_host_ip(host, events);
    return role;
}

}  // namespace wormtrace
