#include "test_support.hpp"

#include <doctest.h>

using namespace testsupport;

namespace {

std::vector<NormalizedEvent> load(const HostId& host, const std::string& dir) {
    auto evs = parse_firewall_log(fixture(dir + "/pfirewall.log"), host, true).events;
    for (auto& e : parse_event_log(fixture(dir + "/security.log"), host, EventLogKind::Security, true).events)
        evs.push_back(std::move(e));
    if (fs::exists(fixture_path(dir + "/system.log")))
        for (auto& e : parse_event_log(fixture(dir + "/system.log"), host, EventLogKind::System, true).events)
            evs.push_back(std::move(e));
    return ordered(std::move(evs));
}

std::vector<IdsAlert> ids(const std::string& dir) {
    return alerts_of(parse_ids_alert_log(fixture(dir + "/alert.log"), YearHint{2009}, true));
}

}  // namespace

TEST_CASE("infer_ip_roles reproduces the four locality cases") {
    // Victim receives 135/TCP.
    auto r = infer_ip_roles(fw(kSahib, "2009-09-07 14:41:09", FirewallAction::OpenInbound, TransportProtocol::Tcp,
                               "192.168.2.10", "192.168.4.20", 3993, 135));
    CHECK(r == IpRole{kSahib.ip, kTarmizi.ip});
    // Victim sends 69/UDP.
    r = infer_ip_roles(fw(kSahib, "2009-09-07 14:41:12", FirewallAction::Open, TransportProtocol::Udp, "192.168.4.20",
                          "192.168.2.10", 3027, 69));
    CHECK(r == IpRole{kSahib.ip, kTarmizi.ip});
    // Attacker sends 135/TCP.
    r = infer_ip_roles(fw(kTarmizi, "2009-09-07 14:41:09", FirewallAction::Open, TransportProtocol::Tcp,
                          "192.168.2.10", "192.168.4.20", 3993, 135));
    CHECK(r == IpRole{kTarmizi.ip, kSahib.ip});
    // Attacker receives 69/UDP.
    r = infer_ip_roles(fw(kTarmizi, "2009-09-07 14:41:11", FirewallAction::OpenInbound, TransportProtocol::Udp,
                          "192.168.4.20", "192.168.2.10", 3027, 69));
    CHECK(r == IpRole{kTarmizi.ip, kSahib.ip});
}

TEST_CASE("infer_ip_roles rejects non-session actions") {
    for (auto action : {FirewallAction::Close, FirewallAction::Drop, FirewallAction::Other}) {
        auto ev = fw(kSahib, "2009-09-07 14:41:09", action, TransportProtocol::Tcp, "192.168.2.10", "192.168.4.20",
                     3993, 135);
        ev.action_text = "INFO-EVENTS-LOST";
        CHECK_THROWS_AS(infer_ip_roles(ev), NotApplicable);
    }
}

TEST_CASE("audit_host_ip") {
    const auto evs = parse_firewall_log(fixture("lab/sahib_victim/pfirewall.log"), kSahib, true).events;
    CHECK(audit_host_ip(kSahib, evs).empty());
    const auto wrong = audit_host_ip(HostId{"SAHIB", ip("192.168.9.9")}, evs);
    CHECK(wrong.size() == 3);
    CHECK(wrong[0].find("192.168.9.9") != std::string::npos);

    auto close = fw(kSahib, "2009-09-07 14:41:20", FirewallAction::Close, TransportProtocol::Tcp, "10.0.0.1",
                    "10.0.0.2", 1, 2);
    CHECK(audit_host_ip(kSahib, {close}).empty());

    const auto sim = simulate_and_analyze(default_config(6, 11));
    for (const auto& role : sim.analysis.roles) CHECK(role.anomalies.empty());
}

TEST_CASE("classify_host on the lab hosts") {
    const MatchConfig cfg;

    SUBCASE("origin attacker") {
        const auto r = analyze_host(kTarmizi, load(kTarmizi, "lab/tarmizi_attacker"), ids("lab/tarmizi_attacker"), cfg);
        CHECK(r.role == Role::Attacker);
        CHECK(r.origin);
        CHECK(r.evidence.victim.empty());
        CHECK(r.evidence.attacker->activation_592.has_value());
    }

    SUBCASE("relay") {
        const auto r = analyze_host(kSahib, load(kSahib, "lab/sahib_relay"), ids("lab/sahib_relay"), cfg);
        CHECK(r.role == Role::MultiStep);
        CHECK_FALSE(r.origin);
        CHECK(r.evidence.multistep.has_value());
    }

    SUBCASE("inbound only") {
        auto evs = parse_firewall_log(fixture("lab/corpus/YUSOF/pfirewall.log"), kYusof, true).events;
        for (auto& e :
             parse_event_log(fixture("lab/corpus/YUSOF/security.log"), kYusof, EventLogKind::Security, true).events)
            evs.push_back(std::move(e));
        const auto r = analyze_host(kYusof, ordered(evs), {}, cfg);
        CHECK(r.role == Role::Victim);
        CHECK_FALSE(r.origin);
    }

    SUBCASE("135 and 4444 inbound only") {
        auto evs = parse_firewall_log(fixture("lab/sahib_victim/pfirewall.log"), kSahib, true).events;
        evs.pop_back();
        CHECK(analyze_host(kSahib, evs, {}, cfg).role == Role::PartiallyExploited);
    }

    SUBCASE("transfer without launch stays partially exploited") {
        CHECK(analyze_host(kSahib, parse_firewall_log(fixture("lab/sahib_victim/pfirewall.log"), kSahib, true).events, {}, cfg)
                  .role == Role::PartiallyExploited);
    }

    SUBCASE("135 only") {
        auto evs = parse_firewall_log(fixture("lab/sahib_victim/pfirewall.log"), kSahib, true).events;
        evs.resize(1);
        CHECK(analyze_host(kSahib, evs, {}, cfg).role == Role::Scanned);
    }

    SUBCASE("no matches") {
        const auto r = classify_host(kSahib, {}, std::nullopt, std::nullopt);
        CHECK(r.role == Role::Clean);
        CHECK_FALSE(r.origin);
        CHECK(r.host == kSahib);
    }

    SUBCASE("pure scanner is still an attacker") {
        auto scan = fw(kTarmizi, "2009-09-07 14:41:09", FirewallAction::Open, TransportProtocol::Tcp, "192.168.2.10",
                       "192.168.2.77", 3000, 135);
        const auto r = analyze_host(kTarmizi, {scan}, {}, cfg);
        CHECK(r.role == Role::Attacker);
        CHECK(r.origin);
    }
}

TEST_CASE("role names") {
    for (auto role : {Role::Clean, Role::Scanned, Role::PartiallyExploited, Role::Victim, Role::Attacker,
                      Role::MultiStep})
        CHECK(parse_role(to_string(role)) == role);
    CHECK_FALSE(parse_role("attacker"));
    CHECK(to_string(Role::PartiallyExploited) == "PartiallyExploited");
}
