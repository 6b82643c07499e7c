#pragma once

/// @file pattern_engine.hpp
/// @brief Matchers for the Blaster victim, attacker and multi-step trace
/// patterns over one host's events plus the corpus IDS alerts.
///
/// The exploit is staged: 135/TCP (RPC DCOM), 4444/TCP (bound shell), then
/// 69/UDP (TFTP download of the worm binary). On the victim's firewall the
/// stages log as OPEN-INBOUND, OPEN-INBOUND, OPEN; on the attacker's as OPEN,
/// OPEN, OPEN-INBOUND.

#include "wormtrace/event_model.hpp"

#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace wormtrace {

inline constexpr std::uint16_t kRpcPort = 135;
inline constexpr std::uint16_t kShellPort = 4444;
inline constexpr std::uint16_t kTftpPort = 69;

enum class Direction { Inbound, Outbound };

/// Exploit stages reached, as a subset of {135, 4444, 69}.
using PortSet = std::set<std::uint16_t>;

struct ExploitSequence {
    Ipv4 peer;
    Direction direction = Direction::Inbound;
    Timestamp t135;
    std::optional<Timestamp> t4444;
    std::optional<Timestamp> t69;

    PortSet ports_reached() const;

    friend bool operator==(const ExploitSequence&, const ExploitSequence&) = default;
};

enum class Completeness {
    Full,         ///< 69 reached and the worm binary ran
    Transferred,  ///< 69 reached but no worm-binary launch observed
    PortsOnly,    ///< stalled at {135} or {135, 4444}
};

std::string_view to_string(Completeness c);

struct VictimMatch {
    HostId host;
    ExploitSequence sequence;
    std::vector<SecurityEvent> impact_592;
    std::optional<SystemEvent> impact_7031;
    std::optional<SystemEvent> impact_1074;
    std::optional<IdsAlert> ids_tftp_get;
    Completeness completeness = Completeness::PortsOnly;
    /// Time of the first worm-binary entry in impact_592.
    std::optional<Timestamp> worm_launch;

    /// Later of t69 and worm_launch; only meaningful when Full.
    Timestamp infection_time() const;

    friend bool operator==(const VictimMatch&, const VictimMatch&) = default;
};

struct AttackerMatch {
    HostId host;
    std::vector<ExploitSequence> sequences;
    std::optional<SecurityEvent> activation_592;
    std::optional<IdsAlert> ids_portsweep;

    Timestamp first_outbound() const { return sequences.front().t135; }

    friend bool operator==(const AttackerMatch&, const AttackerMatch&) = default;
};

struct MultiStepMatch {
    HostId host;
    VictimMatch as_victim;
    AttackerMatch as_attacker;
    std::optional<SecurityEvent> relay_592;

    friend bool operator==(const MultiStepMatch&, const MultiStepMatch&) = default;
};

struct MatchConfig {
    std::chrono::seconds stage_window{60};
    std::chrono::seconds ids_skew{30};
    std::set<std::string> worm_binaries{"msblast.exe", "blastera.exe"};
    std::set<std::string> loader_binaries{"tftp.exe"};
    std::set<std::string> system_accounts{"NT AUTHORITY\\SYSTEM"};

    /// Throws Error unless both durations are positive.
    void validate() const;

    bool is_worm_binary(std::string_view path) const;
    bool is_loader_binary(std::string_view path) const;
    bool is_system_account(std::string_view user) const;

    friend bool operator==(const MatchConfig&, const MatchConfig&) = default;
};

/// Greedy per-peer assembly. Every stage-1 event anchors a new sequence;
/// stage-2 and stage-3 events extend the most recent sequence for their peer
/// when within stage_window of its t135 and the previous stage is present.
std::vector<ExploitSequence> extract_sequences(const std::vector<NormalizedEvent>& events, Direction direction,
                                               const MatchConfig& cfg);

std::vector<VictimMatch> match_victim(const HostId& host, const std::vector<NormalizedEvent>& events,
                                      const std::vector<IdsAlert>& ids, const MatchConfig& cfg);

std::optional<AttackerMatch> match_attacker(const HostId& host, const std::vector<NormalizedEvent>& events,
                                            const std::vector<IdsAlert>& ids, const MatchConfig& cfg);

std::optional<MultiStepMatch> match_multistep(const HostId& host, const std::vector<VictimMatch>& victim,
                                              const std::optional<AttackerMatch>& attacker);

/// Earliest Full match by infection time, or nullptr.
const VictimMatch* earliest_full(const std::vector<VictimMatch>& victim);

bool is_tftp_get(const IdsAlert& alert);
bool is_portsweep(const IdsAlert& alert);

}  // namespace wormtrace
