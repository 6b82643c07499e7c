#include "wormtrace/worm_simulator.hpp"

#include "wormtrace/log_parsers.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <queue>
#include <random>
#include <set>
#include <tuple>

namespace wormtrace {

namespace fs = std::filesystem;
using nlohmann::json;
using std::chrono::seconds;

namespace {

constexpr SignatureId kTftpGetSig{1, 1444, 3};
constexpr SignatureId kPortsweepSig{122, 3, 0};
constexpr SignatureId kPingSig{1, 384, 5};
constexpr std::size_t kPortsweepAttempt = 5;
constexpr seconds kCrashDelay{4};
constexpr seconds kLaunchMin{10};
constexpr seconds kLaunchMax{13};
constexpr std::uint16_t kEphemeralLow = 1025;
constexpr std::uint16_t kEphemeralHigh = 5000;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do x = gen_();
        while (x >= limit);
        return x % n;
    }

    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    /// True with probability p; exact at 0 and 1.
    bool chance(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53 < p;
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 gen_;
};

template <class T>
struct Stamped {
    Timestamp ts;
    std::uint64_t seq;
    T value;
};

struct HostState {
    const SimHost* cfg = nullptr;
    seconds offset{0};
    std::uint16_t next_port = 3000;
    std::uint32_t next_pid = 1000;
    std::uint32_t service_pid = 1000;
    bool reached135 = false;
    bool reached4444 = false;
    bool infected = false;  ///< includes a transfer in flight
    std::optional<Timestamp> infection_time;
    std::vector<std::pair<Timestamp, Timestamp>> down;  ///< open intervals
    std::vector<Ipv4> targets;
    std::size_t next_target = 0;
    std::vector<std::pair<Timestamp, Ipv4>> attempts;
    std::vector<Stamped<FirewallEvent>> firewall;
    std::vector<Stamped<SecurityEvent>> security;
    std::vector<Stamped<SystemEvent>> system;
    std::vector<Stamped<SystemEvent>> application;
};

enum class Action { ScanTick, RelayStart };

struct Scheduled {
    Timestamp at;
    std::uint64_t seq;
    Action action;
    std::size_t host;

    friend bool operator>(const Scheduled& a, const Scheduled& b) {
        return std::tie(a.at, a.seq) > std::tie(b.at, b.seq);
    }
};

class Simulation {
public:
    explicit Simulation(const SimulationConfig& cfg) : cfg_(cfg), rng_(cfg.rng_seed), end_(cfg.start_time + cfg.duration) {
        for (const auto& h : cfg.hosts) {
            HostState s;
            s.cfg = &h;
            if (auto it = cfg.per_host_clock_offset.find(h.name); it != cfg.per_host_clock_offset.end())
                s.offset = it->second;
            s.next_port = static_cast<std::uint16_t>(3000 + rng_.below(50));
            s.next_pid = static_cast<std::uint32_t>(1000 + 4 * rng_.below(100));
            s.service_pid = s.next_pid;
            s.next_pid += 4;
            by_ip_[h.ip] = hosts_.size();
            hosts_.push_back(std::move(s));
        }
        scan_space_ = cfg.scan_space;
        if (scan_space_.empty()) {
            std::set<std::uint32_t> nets;
            for (const auto& h : cfg.hosts) nets.insert(h.ip.value & 0xFFFFFF00u);
            for (auto net : nets)
                for (std::uint32_t last = 1; last <= 254; ++last) scan_space_.push_back(Ipv4{net | last});
        }
    }

    SimulationResult run() {
        const std::size_t seed = index_of(cfg_.seed_attacker);
        auto& s = hosts_[seed];
        s.infected = true;
        security(seed,
                 process_record(s, cfg_.start_time, "C:\\WINDOWS\\system32\\" + cfg_.seed_binary, cfg_.seed_user,
                                cfg_.seed_user, s.cfg->name, "(0x0,0x2273F)"));
        start_scanning(seed, cfg_.start_time);

        while (!queue_.empty()) {
            const auto next = queue_.top();
            queue_.pop();
            if (next.at >= end_) continue;
            if (next.action == Action::ScanTick)
                scan_tick(next.host, next.at);
            else
                relay_start(next.host, next.at);
        }
        add_noise();
        return emit();
    }

private:
    std::size_t index_of(std::string_view name) const {
        for (std::size_t i = 0; i < cfg_.hosts.size(); ++i)
            if (to_lower(cfg_.hosts[i].name) == to_lower(name)) return i;
        throw ConfigError("unknown host " + std::string(name));
    }

    void schedule(Timestamp at, Action action, std::size_t host) { queue_.push({at, seq_++, action, host}); }

    void start_scanning(std::size_t h, Timestamp now) {
        auto& s = hosts_[h];
        s.targets.clear();
        for (auto ip : scan_space_)
            if (ip != s.cfg->ip) s.targets.push_back(ip);
        rng_.shuffle(s.targets);
        if (!s.targets.empty()) schedule(now + cfg_.scan_interarrival, Action::ScanTick, h);
    }

    void scan_tick(std::size_t h, Timestamp now) {
        for (std::uint32_t i = 0; i < cfg_.batch_width && hosts_[h].next_target < hosts_[h].targets.size(); ++i) {
            const auto target = hosts_[h].targets[hosts_[h].next_target++];
            attempt(h, target, now);
        }
        if (hosts_[h].next_target < hosts_[h].targets.size()) schedule(now + cfg_.scan_interarrival, Action::ScanTick, h);
    }

    bool is_down(const HostState& s, Timestamp t) const {
        return std::any_of(s.down.begin(), s.down.end(), [&](const auto& iv) { return t > iv.first && t < iv.second; });
    }

    std::uint16_t ephemeral(HostState& s) {
        const auto port = s.next_port;
        const auto step = static_cast<std::uint16_t>(1 + rng_.below(9));
        s.next_port = port + step > kEphemeralHigh ? kEphemeralLow : static_cast<std::uint16_t>(port + step);
        return port;
    }

    std::uint32_t pid(HostState& s) {
        const auto p = s.next_pid;
        s.next_pid += static_cast<std::uint32_t>(4 * (1 + rng_.below(8)));
        return p;
    }

    void firewall(std::size_t h, Timestamp t, FirewallAction action, TransportProtocol proto, Ipv4 src, Ipv4 dst,
                  std::uint16_t sport, std::uint16_t dport) {
        auto& s = hosts_[h];
        FirewallEvent ev{{s.cfg->name, s.cfg->ip}, t + s.offset, action, "", proto, "", src, dst, sport, dport};
        s.firewall.push_back({ev.ts, seq_++, std::move(ev)});
    }

    void security(std::size_t h, SecurityEvent ev) {
        hosts_[h].security.push_back({ev.ts, seq_++, std::move(ev)});
    }

    SecurityEvent process_record(HostState& s, Timestamp t, const std::string& image, const std::string& user,
                                 const std::string& user_name, const std::string& domain, const std::string& logon) {
        SecurityEvent ev;
        ev.host = {s.cfg->name, s.cfg->ip};
        ev.ts = t + s.offset;
        ev.source = "Security";
        ev.type = "Success Audit";
        ev.category = "Detailed Tracking";
        ev.event_id = 592;
        ev.user = user;
        ev.computer = s.cfg->name;
        const auto new_pid = pid(s);
        ev.raw_message = "A new process has been created:\n"
                         "New Process ID: " + std::to_string(new_pid) + "\n"
                         "Image File Name: " + image + "\n"
                         "Creator Process ID: " + std::to_string(s.service_pid) + "\n"
                         "User Name: " + user_name + "\n"
                         "Domain: " + domain + "\n"
                         "Logon ID: " + logon;
        extract_message_fields(ev);
        return ev;
    }

    SecurityEvent system_process(HostState& s, Timestamp t, const std::string& binary) {
        return process_record(s, t, "C:\\WINDOWS\\system32\\" + binary, "NT AUTHORITY\\SYSTEM", s.cfg->name + "$",
                              "WORKGROUP", "(0x0,0x3E7)");
    }

    void system_record(std::size_t h, Timestamp t, std::string source, std::string type, std::uint32_t id,
                       std::string user, std::string message) {
        auto& s = hosts_[h];
        SystemEvent ev;
        ev.host = {s.cfg->name, s.cfg->ip};
        ev.ts = t + s.offset;
        ev.source = std::move(source);
        ev.type = std::move(type);
        ev.category = "None";
        ev.event_id = id;
        ev.user = std::move(user);
        ev.computer = s.cfg->name;
        ev.raw_message = std::move(message);
        ev.kind = EventLogKind::System;
        s.system.push_back({ev.ts, seq_++, std::move(ev)});
    }

    void ids(Timestamp actual, IdsAlert alert) {
        alert.ts = actual + cfg_.ids_clock_offset + std::chrono::microseconds{rng_.below(1'000'000)};
        ids_.push_back({alert.ts, seq_++, std::move(alert)});
    }

    double transfer_prob(const SimHost& h) const { return h.transfer_success_prob.value_or(cfg_.transfer_success_prob); }

    void attempt(std::size_t a, Ipv4 target, Timestamp t135) {
        auto& attacker = hosts_[a];
        const Ipv4 aip = attacker.cfg->ip;
        attacker.attempts.emplace_back(t135, target);
        TruthEdge edge{aip, target, {kRpcPort}, t135};

        const auto sport135 = ephemeral(attacker);
        firewall(a, t135, FirewallAction::Open, TransportProtocol::Tcp, aip, target, sport135, kRpcPort);

        auto it = by_ip_.find(target);
        if (it == by_ip_.end() || is_down(hosts_[it->second], t135)) {
            edges_.push_back(edge);
            return;
        }
        const std::size_t v = it->second;
        auto& victim = hosts_[v];
        firewall(v, t135, FirewallAction::OpenInbound, TransportProtocol::Tcp, aip, target, sport135, kRpcPort);
        victim.reached135 = true;
        if (!victim.cfg->vulnerable || victim.infected) {
            edges_.push_back(edge);
            return;
        }

        const Timestamp t4444 =
            t135 + seconds{rng_.between(cfg_.exploit_latency_min.count(), cfg_.exploit_latency_max.count())};
        const auto sport4444 = ephemeral(attacker);
        firewall(a, t4444, FirewallAction::Open, TransportProtocol::Tcp, aip, target, sport4444, kShellPort);
        firewall(v, t4444, FirewallAction::OpenInbound, TransportProtocol::Tcp, aip, target, sport4444, kShellPort);
        security(v, system_process(victim, t4444, cfg_.loader_binary));
        victim.reached4444 = true;
        edge.ports_reached.insert(kShellPort);

        if (!rng_.chance(transfer_prob(*victim.cfg))) {
            edges_.push_back(edge);
            return;
        }

        const Timestamp t69 = t4444 + seconds{rng_.between(0, 1)};
        const auto sport69 = ephemeral(victim);
        firewall(v, t69, FirewallAction::Open, TransportProtocol::Udp, target, aip, sport69, kTftpPort);
        firewall(a, t69, FirewallAction::OpenInbound, TransportProtocol::Udp, target, aip, sport69, kTftpPort);
        ids(t69, IdsAlert{{}, kTftpGetSig, "TFTP Get", "Potentially Bad Traffic", 2, target, sport69, aip, kTftpPort,
                          IdsProtocol::udp()});
        ++transfers_;
        edge.ports_reached.insert(kTftpPort);
        edges_.push_back(edge);

        const Timestamp launch = t69 + seconds{rng_.between(kLaunchMin.count(), kLaunchMax.count())};
        security(v, system_process(victim, launch, cfg_.worm_binary));
        victim.infected = true;
        victim.infection_time = launch;

        const Timestamp crash = launch + kCrashDelay;
        system_record(v, crash, "Service Control Manager", "Error", 7031, "N/A",
                      "The Remote Procedure Call (RPC) service terminated unexpectedly. It has done this 1 time(s). "
                      "The following corrective action will be taken in 60000 milliseconds: Reboot the machine.");
        system_record(v, crash, "USER32", "Information", 1074, "NT AUTHORITY\\SYSTEM",
                      "The process winlogon.exe has initiated the restart of " + victim.cfg->name +
                          " for the following reason: No title for this reason could be found\n"
                          "Minor Reason: 0x0f\n"
                          "Shutdown Type: reboot\n"
                          "Comment: Windows must now restart because the Remote Procedure Call (RPC) service "
                          "terminated unexpectedly");
        Timestamp resume = crash + seconds{1};
        if (cfg_.reboot_after_crash) {
            resume = crash + cfg_.reboot_gap;
            victim.down.emplace_back(crash, resume);
        }
        schedule(resume, Action::RelayStart, v);
    }

    void relay_start(std::size_t h, Timestamp now) {
        auto& s = hosts_[h];
        const std::string sid = "S-1-5-21-" + std::to_string(100000000 + rng_.below(900000000)) + "-" +
                                std::to_string(100000000 + rng_.below(900000000)) + "-" +
                                std::to_string(100000000 + rng_.below(900000000)) + "-1003";
        security(h,
                 process_record(s, now, "C:\\WINDOWS\\system32\\" + cfg_.worm_binary, sid, "Owner", s.cfg->name,
                                "(0x0,0x" + std::to_string(10000 + rng_.below(90000)) + ")"));
        start_scanning(h, now);
    }

    void add_noise() {
        if (cfg_.noise_lines_per_host == 0) return;
        const auto span = static_cast<std::uint64_t>(std::chrono::duration_cast<seconds>(cfg_.duration).count());
        for (std::size_t h = 0; h < hosts_.size(); ++h) {
            auto& s = hosts_[h];
            const Ipv4 ip = s.cfg->ip;
            for (std::uint32_t i = 0; i < cfg_.noise_lines_per_host; ++i) {
                const Timestamp t = cfg_.start_time + seconds{rng_.below(span)};
                if (is_down(s, t)) continue;
                const Ipv4 web = Ipv4::from_octets(10, 20, static_cast<std::uint8_t>(rng_.below(256)),
                                                   static_cast<std::uint8_t>(1 + rng_.below(254)));
                switch (i % 3) {
                    case 0: {
                        const auto port = ephemeral(s);
                        firewall(h, t, FirewallAction::Open, TransportProtocol::Tcp, ip, web, port, 80);
                        const Timestamp closed = t + seconds{1 + rng_.below(30)};
                        if (!is_down(s, closed))
                            firewall(h, closed, FirewallAction::Close, TransportProtocol::Tcp, ip, web, port, 80);
                        break;
                    }
                    case 1:
                        firewall(h, t, FirewallAction::Drop, TransportProtocol::Udp, web, ip,
                                 static_cast<std::uint16_t>(1025 + rng_.below(4000)), 137);
                        break;
                    default:
                        firewall(h, t, FirewallAction::OpenInbound, TransportProtocol::Tcp, web, ip,
                                 static_cast<std::uint16_t>(1025 + rng_.below(4000)), 139);
                        break;
                }
                if (i % 4 == 0) {
                    SystemEvent ev;
                    ev.host = {s.cfg->name, ip};
                    ev.ts = t + s.offset;
                    ev.source = "LoadPerf";
                    ev.type = "Information";
                    ev.category = "None";
                    ev.event_id = 1000;
                    ev.user = "N/A";
                    ev.computer = s.cfg->name;
                    ev.raw_message = "Performance counters for the RemoteAccess service were loaded successfully.";
                    ev.kind = EventLogKind::Application;
                    s.application.push_back({ev.ts, seq_++, std::move(ev)});
                    const auto& peer = hosts_[rng_.below(hosts_.size())].cfg->ip;
                    ids(t, IdsAlert{{}, kPingSig, "ICMP PING", "Misc activity", 3, ip, std::nullopt, peer,
                                    std::nullopt, IdsProtocol::proto(1)});
                }
            }
        }
    }

    template <class T>
    static void order(std::vector<Stamped<T>>& v) {
        std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return std::tie(a.ts, a.seq) < std::tie(b.ts, b.seq); });
    }

    SimulationResult emit() {
        SimulationResult out;
        auto& truth = out.truth;

        for (std::size_t h = 0; h < hosts_.size(); ++h) {
            auto& s = hosts_[h];
            if (s.attempts.empty()) continue;
            truth.scanners.push_back(s.cfg->name);
            const auto& [t, dst] = s.attempts[std::min(kPortsweepAttempt, s.attempts.size()) - 1];
            ids(t, IdsAlert{{}, kPortsweepSig, "(portscan) TCP Portsweep", std::nullopt, std::nullopt, s.cfg->ip,
                            std::nullopt, dst, std::nullopt, IdsProtocol::proto(255)});
        }

        CorpusManifest manifest;
        manifest.ids_log = std::string(kDefaultIdsLog);
        manifest.year_hint = cfg_.year_hint_override ? cfg_.year_hint_override : cfg_.start_time.year();
        const std::size_t seed = index_of(cfg_.seed_attacker);
        for (std::size_t h = 0; h < hosts_.size(); ++h) {
            auto& s = hosts_[h];
            const auto& name = s.cfg->name;
            ManifestHost mh{name, s.cfg->ip, {LogKind::Firewall, LogKind::Security, LogKind::System}};
            if (cfg_.noise_lines_per_host) mh.logs.push_back(LogKind::Application);
            manifest.hosts.push_back(mh);

            order(s.firewall);
            std::string fw = firewall_log_header();
            for (const auto& r : s.firewall) fw += format_firewall_line(r.value) + "\n";
            out.files[name + "/" + std::string(log_file_name(LogKind::Firewall))] = std::move(fw);

            auto records = [](auto& v) {
                order(v);
                std::string text;
                for (const auto& r : v) text += format_event_record(r.value) + "\n";
                return text;
            };
            out.files[name + "/" + std::string(log_file_name(LogKind::Security))] = records(s.security);
            out.files[name + "/" + std::string(log_file_name(LogKind::System))] = records(s.system);
            if (cfg_.noise_lines_per_host)
                out.files[name + "/" + std::string(log_file_name(LogKind::Application))] = records(s.application);

            ExpectedRole role;
            if (h == seed) {
                role = {Role::Attacker, true};
            } else if (s.infection_time) {
                role.role = s.attempts.empty() ? Role::Victim : Role::MultiStep;
                truth.infection_times[name] = *s.infection_time;
            } else if (s.reached4444) {
                role.role = Role::PartiallyExploited;
            } else if (s.reached135) {
                role.role = Role::Scanned;
            }
            truth.roles[name] = role;
        }

        order(ids_);
        std::string alerts;
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            if (i) alerts += '\n';
            alerts += format_ids_block(ids_[i].value);
        }
        out.files[std::string(kDefaultIdsLog)] = std::move(alerts);
        out.files[std::string(kManifestFile)] = manifest_to_json(manifest);

        truth.edges = std::move(edges_);
        std::stable_sort(truth.edges.begin(), truth.edges.end(), [](const TruthEdge& x, const TruthEdge& y) {
            return std::tie(x.t135, x.from, x.to) < std::tie(y.t135, y.from, y.to);
        });
        truth.tftp_transfers = transfers_;
        out.files[std::string(kGroundTruthFile)] = ground_truth_to_json(truth);
        return out;
    }

    const SimulationConfig& cfg_;
    Rng rng_;
    Timestamp end_;
    std::vector<HostState> hosts_;
    std::map<Ipv4, std::size_t> by_ip_;
    std::vector<Ipv4> scan_space_;
    std::priority_queue<Scheduled, std::vector<Scheduled>, std::greater<>> queue_;
    std::uint64_t seq_ = 0;
    std::vector<TruthEdge> edges_;
    std::vector<Stamped<IdsAlert>> ids_;
    std::size_t transfers_ = 0;
};

std::string ts_text(const Timestamp& t) { return t.iso_micros(); }

Timestamp ts_from(const json& j) {
    const auto text = j.get<std::string>();
    auto ts = Timestamp::parse_iso(text);
    if (!ts) throw Error("bad timestamp '" + text + "'");
    return *ts;
}

Ipv4 ip_from(const json& j) {
    auto ip = Ipv4::parse(j.get<std::string>());
    if (!ip) throw Error("bad ip '" + j.get<std::string>() + "'");
    return *ip;
}

}  // namespace

void SimulationConfig::validate() const {
    if (hosts.empty()) throw ConfigError("no hosts configured");
    std::set<std::string> names;
    std::set<Ipv4> ips;
    for (const auto& h : hosts) {
        if (h.name.empty() || h.name.find_first_of("/\\ \t") != std::string::npos)
            throw ConfigError("invalid host name '" + h.name + "'");
        if (!names.insert(to_lower(h.name)).second) throw ConfigError("duplicate host name " + h.name);
        if (!ips.insert(h.ip).second) throw ConfigError("duplicate host ip " + h.ip.to_string());
        if (h.transfer_success_prob && !(*h.transfer_success_prob >= 0.0 && *h.transfer_success_prob <= 1.0))
            throw ConfigError("transfer_success_prob for " + h.name + " outside [0,1]");
    }
    if (!find(seed_attacker)) throw ConfigError("seed attacker '" + seed_attacker + "' is not a configured host");
    for (const auto& [name, offset] : per_host_clock_offset)
        if (!find(name)) throw ConfigError("clock offset for unknown host '" + name + "'");
    if (!(transfer_success_prob >= 0.0 && transfer_success_prob <= 1.0))
        throw ConfigError("transfer_success_prob outside [0,1]");
    if (duration <= seconds{0}) throw ConfigError("duration must be positive");
    if (scan_interarrival <= seconds{0}) throw ConfigError("scan_interarrival must be positive");
    if (duration <= scan_interarrival) throw ConfigError("duration must exceed scan_interarrival");
    if (exploit_latency_min < seconds{0} || exploit_latency_max < exploit_latency_min)
        throw ConfigError("invalid exploit latency range");
    if (seconds{1} + kLaunchMax >= tftp_timeout)
        throw ConfigError("worm launch does not fit inside tftp_timeout");
    if (reboot_gap < seconds{0}) throw ConfigError("reboot_gap must be non-negative");
    if (batch_width == 0) throw ConfigError("batch_width must be positive");
    if (year_hint_override) YearHint{year_hint_override};
    if (start_time.year() < 1970 || (start_time + duration).year() > 9999)
        throw ConfigError("simulation window outside 1970-9999");
    for (const auto* binary : {&seed_binary, &worm_binary, &loader_binary})
        if (binary->empty()) throw ConfigError("binary names must be non-empty");
}

const SimHost* SimulationConfig::find(std::string_view name) const {
    for (const auto& h : hosts)
        if (to_lower(h.name) == to_lower(name)) return &h;
    return nullptr;
}

SimulationResult simulate(const SimulationConfig& cfg) {
    cfg.validate();
    return Simulation(cfg).run();
}

bool replay_check(const SimulationConfig& cfg) {
    const auto a = simulate(cfg);
    const auto b = simulate(cfg);
    return a.files == b.files && a.truth == b.truth;
}

void write_corpus(const fs::path& dir, const CorpusFiles& files, bool force) {
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir)) throw Error(dir.string() + " exists and is not a directory");
        if (!fs::is_empty(dir) && !force) throw Error(dir.string() + " is not empty (use --force to overwrite)");
    }
    for (const auto& [rel, content] : files) {
        const auto path = dir / rel;
        fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path.string());
        out << content;
    }
}

std::string ground_truth_to_json(const GroundTruth& truth) {
    json j;
    j["roles"] = json::object();
    for (const auto& [name, r] : truth.roles) j["roles"][name] = {{"role", to_string(r.role)}, {"origin", r.origin}};
    j["edges"] = json::array();
    for (const auto& e : truth.edges)
        j["edges"].push_back({{"from", e.from.to_string()},
                              {"to", e.to.to_string()},
                              {"ports", std::vector<int>(e.ports_reached.begin(), e.ports_reached.end())},
                              {"t135", ts_text(e.t135)}});
    j["infection_times"] = json::object();
    for (const auto& [name, t] : truth.infection_times) j["infection_times"][name] = ts_text(t);
    j["tftp_transfers"] = truth.tftp_transfers;
    j["scanners"] = truth.scanners;
    return j.dump(2) + "\n";
}

GroundTruth ground_truth_from_json(std::string_view text) {
    GroundTruth truth;
    try {
        const json j = json::parse(text);
        for (const auto& [name, r] : j.at("roles").items()) {
            auto role = parse_role(r.at("role").get<std::string>());
            if (!role) throw Error("ground truth: unknown role for " + name);
            truth.roles[name] = {*role, r.at("origin").get<bool>()};
        }
        for (const auto& e : j.at("edges")) {
            TruthEdge edge{ip_from(e.at("from")), ip_from(e.at("to")), {}, ts_from(e.at("t135"))};
            for (int p : e.at("ports")) edge.ports_reached.insert(static_cast<std::uint16_t>(p));
            truth.edges.push_back(std::move(edge));
        }
        for (const auto& [name, t] : j.at("infection_times").items()) truth.infection_times[name] = ts_from(t);
        truth.tftp_transfers = j.value("tftp_transfers", std::size_t{0});
        truth.scanners = j.value("scanners", std::vector<std::string>{});
    } catch (const json::exception& e) {
        throw Error(std::string("ground truth: ") + e.what());
    }
    return truth;
}

SimulationConfig default_config(std::size_t host_count, std::uint64_t rng_seed) {
    if (host_count == 0 || host_count > 240) throw ConfigError("host count must be in 1..240");
    SimulationConfig cfg;
    for (std::size_t i = 0; i < host_count; ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "HOST%02zu", i + 1);
        cfg.hosts.push_back({name, Ipv4::from_octets(192, 168, 1, static_cast<std::uint8_t>(10 + i)), true, {}});
    }
    cfg.seed_attacker = cfg.hosts.front().name;
    cfg.rng_seed = rng_seed;
    return cfg;
}

SimulationConfig testbed_config(std::uint64_t rng_seed) {
    SimulationConfig cfg;
    cfg.hosts = {
        {"TARMIZI", Ipv4::from_octets(192, 168, 2, 10), true, {}},
        {"SAHIB", Ipv4::from_octets(192, 168, 4, 20), true, {}},
        {"YUSOF", Ipv4::from_octets(192, 168, 11, 20), true, {}},
        {"SELAMAT", Ipv4::from_octets(192, 168, 11, 21), true, {}},
        {"AMINAH", Ipv4::from_octets(192, 168, 2, 11), true, {}},
        {"FAUZI", Ipv4::from_octets(192, 168, 4, 21), true, {}},
        {"HASNAH", Ipv4::from_octets(192, 168, 4, 22), true, {}},
        {"ISMAIL", Ipv4::from_octets(192, 168, 11, 22), true, {}},
    };
    cfg.seed_attacker = "TARMIZI";
    cfg.rng_seed = rng_seed;
    return cfg;
}

SimulationConfig config_from_json(std::string_view text) {
    SimulationConfig cfg;
    try {
        const json j = json::parse(text);
        for (const auto& h : j.at("hosts")) {
            SimHost host{h.at("name").get<std::string>(), ip_from(h.at("ip")), h.value("vulnerable", true), {}};
            if (h.contains("transfer_success_prob")) host.transfer_success_prob = h["transfer_success_prob"].get<double>();
            if (h.contains("clock_offset_s"))
                cfg.per_host_clock_offset[host.name] = seconds{h["clock_offset_s"].get<long>()};
            cfg.hosts.push_back(std::move(host));
        }
        cfg.seed_attacker = j.at("seed_attacker").get<std::string>();
        cfg.rng_seed = j.value("rng_seed", std::uint64_t{0});
        if (j.contains("start_time")) cfg.start_time = ts_from(j["start_time"]);
        if (j.contains("duration_s")) cfg.duration = seconds{j["duration_s"].get<long>()};
        cfg.transfer_success_prob = j.value("transfer_success_prob", cfg.transfer_success_prob);
        if (j.contains("scan_interarrival_s")) cfg.scan_interarrival = seconds{j["scan_interarrival_s"].get<long>()};
        cfg.reboot_after_crash = j.value("reboot_after_crash", cfg.reboot_after_crash);
        if (j.contains("reboot_gap_s")) cfg.reboot_gap = seconds{j["reboot_gap_s"].get<long>()};
        if (j.contains("ids_clock_offset_s")) cfg.ids_clock_offset = seconds{j["ids_clock_offset_s"].get<long>()};
        cfg.batch_width = j.value("batch_width", cfg.batch_width);
        cfg.noise_lines_per_host = j.value("noise_lines_per_host", cfg.noise_lines_per_host);
        for (const auto& ip : j.value("scan_space", json::array())) cfg.scan_space.push_back(ip_from(ip));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("topology: ") + e.what());
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("topology: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string config_to_json(const SimulationConfig& cfg) {
    json j;
    j["hosts"] = json::array();
    for (const auto& h : cfg.hosts) {
        json host{{"name", h.name}, {"ip", h.ip.to_string()}, {"vulnerable", h.vulnerable}};
        if (h.transfer_success_prob) host["transfer_success_prob"] = *h.transfer_success_prob;
        if (auto it = cfg.per_host_clock_offset.find(h.name); it != cfg.per_host_clock_offset.end())
            host["clock_offset_s"] = it->second.count();
        j["hosts"].push_back(std::move(host));
    }
    j["seed_attacker"] = cfg.seed_attacker;
    j["rng_seed"] = cfg.rng_seed;
    j["start_time"] = cfg.start_time.iso();
    j["duration_s"] = cfg.duration.count();
    j["transfer_success_prob"] = cfg.transfer_success_prob;
    j["scan_interarrival_s"] = cfg.scan_interarrival.count();
    j["reboot_after_crash"] = cfg.reboot_after_crash;
    j["reboot_gap_s"] = cfg.reboot_gap.count();
    j["ids_clock_offset_s"] = cfg.ids_clock_offset.count();
    j["batch_width"] = cfg.batch_width;
    j["noise_lines_per_host"] = cfg.noise_lines_per_host;
    if (!cfg.scan_space.empty()) {
        j["scan_space"] = json::array();
        for (auto ip : cfg.scan_space) j["scan_space"].push_back(ip.to_string());
    }
    return j.dump(2) + "\n";
}

}  // namespace wormtrace
