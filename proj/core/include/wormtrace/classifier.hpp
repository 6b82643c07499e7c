#pragma once

#include "wormtrace/pattern_engine.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wormtrace {

enum class Role { Clean, Scanned, PartiallyExploited, Victim, Attacker, MultiStep };

std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view text);

struct HostEvidence {
    std::vector<VictimMatch> victim;
    std::optional<AttackerMatch> attacker;
    std::optional<MultiStepMatch> multistep;

    friend bool operator==(const HostEvidence&, const HostEvidence&) = default;
};

struct HostRole {
    HostId host;
    Role role = Role::Clean;
    /// Outbreak seed: an attacker with no earlier full infection of its own.
    bool origin = false;
    HostEvidence evidence;
    std::vector<std::string> anomalies;

    friend bool operator==(const HostRole&, const HostRole&) = default;
};

/// Local/remote sides of a firewall session.
struct IpRole {
    Ipv4 local;
    Ipv4 remote;

    friend bool operator==(const IpRole&, const IpRole&) = default;
};

class NotApplicable : public Error {
public:
    using Error::Error;
};

/// OPEN: local = src. OPEN-INBOUND: local = dst. Other actions throw NotApplicable.
IpRole infer_ip_roles(const FirewallEvent& ev);

/// One anomaly per OPEN/OPEN-INBOUND event whose local side is not host.ip.
std::vector<std::string> audit_host_ip(const HostId& host, const std::vector<NormalizedEvent>& events);

/// Precedence MultiStep > Attacker > Victim > PartiallyExploited > Scanned > Clean.
HostRole classify_host(const HostId& host, std::vector<VictimMatch> victim, std::optional<AttackerMatch> attacker,
                       std::optional<MultiStepMatch> multi);

/// Runs every matcher and the audit over one host's events.
HostRole analyze_host(const HostId& host, const std::vector<NormalizedEvent>& events,
                      const std::vector<IdsAlert>& ids, const MatchConfig& cfg);

}  // namespace wormtrace
