#pragma once

/// @file worm_simulator.hpp
/// @brief Deterministic discrete-event Blaster outbreak simulator that emits a
/// labeled corpus in the same formats the parsers read.
///
/// Per attempt by scanner A on address X:
///   t135            A: OPEN 135/TCP; X (if a live host): OPEN-INBOUND
///   t4444 = +2..3 s vulnerable, not yet infected X only; paired 4444/TCP;
///                   X: 592 tftp.exe (system account)
///   t69   = +0..1 s with the transfer probability; X: OPEN 69/UDP, A:
///                   OPEN-INBOUND; IDS "TFTP Get" (src X, dst A)
///   +10..13 s       X: 592 worm binary (system account), then 4 s later 7031
///                   and 1074; X is silent for reboot_gap, then relays.
///
/// The generator is mt19937_64 with hand-written range mapping and shuffle,
/// so output is identical across standard libraries.

#include "wormtrace/classifier.hpp"
#include "wormtrace/corpus.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wormtrace {

class ConfigError : public Error {
public:
    using Error::Error;
};

struct SimHost {
    std::string name;
    Ipv4 ip;
    bool vulnerable = true;
    /// Overrides SimulationConfig::transfer_success_prob for this target.
    std::optional<double> transfer_success_prob;

    friend bool operator==(const SimHost&, const SimHost&) = default;
};

struct SimulationConfig {
    std::vector<SimHost> hosts;
    std::string seed_attacker;
    std::uint64_t rng_seed = 0;
    Timestamp start_time = Timestamp::from_civil(2009, 9, 7, 14, 40, 0);
    std::chrono::seconds duration{3600};
    double transfer_success_prob = 1.0;
    std::chrono::seconds scan_interarrival{2};
    std::chrono::seconds exploit_latency_min{2};
    std::chrono::seconds exploit_latency_max{3};
    /// The TFTP server closes this long after the shell opens; the worm binary
    /// always launches inside it.
    std::chrono::seconds tftp_timeout{20};
    bool reboot_after_crash = true;
    std::chrono::seconds reboot_gap{60};
    std::chrono::seconds ids_clock_offset{-9};
    std::map<std::string, std::chrono::seconds> per_host_clock_offset;
    /// Targets probed per scan tick.
    std::uint32_t batch_width = 1;
    /// Benign firewall lines per host; also adds ICMP ping alerts and an
    /// application log. 0 emits only worm evidence.
    std::uint32_t noise_lines_per_host = 0;
    /// Addresses scanned; empty means .1-.254 of every /24 holding a host.
    std::vector<Ipv4> scan_space;
    int year_hint_override = 0;  ///< 0: manifest year is the start year
    std::string seed_user = "Kamal";
    std::string seed_binary = "blasterA.exe";
    std::string worm_binary = "msblast.exe";
    std::string loader_binary = "tftp.exe";

    /// Throws ConfigError: unknown or missing seed, duplicate names/ips,
    /// probabilities outside [0,1], non-positive durations, duration not
    /// longer than scan_interarrival, latencies that do not fit tftp_timeout.
    void validate() const;

    const SimHost* find(std::string_view name) const;

    friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

struct ExpectedRole {
    Role role = Role::Clean;
    bool origin = false;

    friend bool operator==(const ExpectedRole&, const ExpectedRole&) = default;
};

struct TruthEdge {
    Ipv4 from;
    Ipv4 to;
    PortSet ports_reached;
    Timestamp t135;

    friend bool operator==(const TruthEdge&, const TruthEdge&) = default;
};

struct GroundTruth {
    std::map<std::string, ExpectedRole> roles;
    /// One per attempt, ordered by (t135, from, to). Times are unshifted.
    std::vector<TruthEdge> edges;
    /// Worm-binary launch time per infected host, unshifted.
    std::map<std::string, Timestamp> infection_times;
    std::size_t tftp_transfers = 0;
    std::vector<std::string> scanners;

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

std::string ground_truth_to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(std::string_view text);

/// Relative path -> file content. Keys use '/' separators.
using CorpusFiles = std::map<std::string, std::string>;

struct SimulationResult {
    CorpusFiles files;  ///< includes manifest.json and ground_truth.json
    GroundTruth truth;
};

inline constexpr std::string_view kGroundTruthFile = "ground_truth.json";

SimulationResult simulate(const SimulationConfig& cfg);

/// Simulates twice; true iff files and ground truth are identical.
bool replay_check(const SimulationConfig& cfg);

/// Throws Error if dir is a non-empty directory and force is false.
void write_corpus(const std::filesystem::path& dir, const CorpusFiles& files, bool force);

/// N hosts HOST01.. on 192.168.1.0/24 (.10, .11, ...), HOST01 seeds.
SimulationConfig default_config(std::size_t host_count, std::uint64_t rng_seed);

/// Eight hosts over three subnets with TARMIZI as the seed.
SimulationConfig testbed_config(std::uint64_t rng_seed);

/// Topology file: {"hosts":[{"name","ip","vulnerable"?,"transfer_success_prob"?,
/// "clock_offset_s"?}], "seed_attacker", "rng_seed"?, "start_time"?, "duration_s"?,
/// "transfer_success_prob"?, "scan_interarrival_s"?, "reboot_after_crash"?,
/// "reboot_gap_s"?, "ids_clock_offset_s"?, "batch_width"?, "noise_lines_per_host"?,
/// "scan_space"?: [ip...]}. Throws ConfigError.
SimulationConfig config_from_json(std::string_view text);
std::string config_to_json(const SimulationConfig& cfg);

}  // namespace wormtrace
