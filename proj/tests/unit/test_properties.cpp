// Invariants checked over many simulated outbreaks.

#include "test_support.hpp"

#include <doctest.h>

using namespace testsupport;

namespace {

constexpr int kRuns = 12;

std::vector<SimulationConfig> configs(std::uint64_t seed, bool with_offsets) {
    std::mt19937_64 gen{seed};
    std::vector<SimulationConfig> out;
    for (int i = 0; i < kRuns; ++i) {
        auto cfg = random_config(gen);
        if (!with_offsets) cfg.per_host_clock_offset.clear();
        if (i % 4 == 3) cfg.noise_lines_per_host = 20;
        out.push_back(std::move(cfg));
    }
    return out;
}

int rank(Role r) { return static_cast<int>(r); }

}  // namespace

TEST_CASE("simulator logs round-trip and account for every unit") {
    for (const auto& cfg : configs(101, true)) {
        const auto sim = simulate(cfg);
        const auto manifest = manifest_from_json(sim.files.at(std::string(kManifestFile)));
        for (const auto& [rel, text] : sim.files) {
            if (!is_log_file(rel)) continue;
            CAPTURE(rel);
            const auto r = reparse_corpus_file(rel, text, manifest, *manifest.year_hint);
            CHECK(r.report.skipped.empty());
            CHECK(r.report.units == r.report.events.size() + r.report.skipped.size() + r.report.ignored);
            CHECK(r.rewritten == text);
        }
    }
}

TEST_CASE("store order is a pure function of the corpus") {
    for (const auto& cfg : configs(102, true)) {
        const auto sim = simulate(cfg);
        const auto a = load_corpus(sim.files, LoadOptions{true, std::nullopt});
        const auto b = load_corpus(sim.files, LoadOptions{true, std::nullopt});
        CHECK(a.store == b.store);
        std::size_t total = 0;
        for (const auto& f : a.files) total += f.events;
        CHECK(total == a.store.size());
        const auto evs = a.store.events();
        for (std::size_t i = 1; i < evs.size(); ++i) CHECK(event_time(evs[i - 1]) <= event_time(evs[i]));
    }
}

// A probe that lands while the target reboots is only visible from the attacker's side.
TEST_CASE("inbound and outbound views of an attempt agree") {
    const MatchConfig mc;
    for (const auto& cfg : configs(103, false)) {
        const auto run = simulate_and_analyze(cfg);
        const auto& store = run.corpus.store;
        std::multiset<std::tuple<Ipv4, Ipv4, Timestamp, PortSet>> inbound, outbound;
        for (const auto& h : store.hosts()) {
            const auto evs = store.events_for_host(h);
            for (const auto& s : extract_sequences(evs, Direction::Inbound, mc))
                inbound.insert({s.peer, h.ip, s.t135, s.ports_reached()});
            for (const auto& s : extract_sequences(evs, Direction::Outbound, mc))
                if (store.find_host_by_ip(s.peer) && !target_down(cfg, run.sim.truth, s.peer, s.t135))
                    outbound.insert({h.ip, s.peer, s.t135, s.ports_reached()});
        }
        CHECK(inbound == outbound);
    }
}

TEST_CASE("stages are ordered and bounded by the window") {
    for (const auto& cfg : configs(104, true)) {
        const auto run = simulate_and_analyze(cfg);
        const auto& mc = run.analysis.config;
        for (const auto& h : run.corpus.store.hosts()) {
            const auto evs = run.corpus.store.events_for_host(h);
            for (auto dir : {Direction::Inbound, Direction::Outbound})
                for (const auto& s : extract_sequences(evs, dir, mc)) {
                    if (s.t69) REQUIRE(s.t4444);
                    if (s.t4444) {
                        CHECK(s.t135 <= *s.t4444);
                        CHECK(*s.t4444 - s.t135 <= mc.stage_window);
                    }
                    if (s.t69) {
                        CHECK(*s.t4444 <= *s.t69);
                        CHECK(*s.t69 - s.t135 <= mc.stage_window);
                    }
                }
        }
    }
}

TEST_CASE("widening the window never loses stages") {
    const auto cfg = configs(105, false).front();
    const auto corpus = load_corpus(simulate(cfg).files);
    for (const auto& h : corpus.store.hosts()) {
        const auto evs = corpus.store.events_for_host(h);
        for (auto dir : {Direction::Inbound, Direction::Outbound}) {
            std::vector<ExploitSequence> prev;
            for (long w : {1L, 2L, 3L, 5L, 15L, 60L, 120L, 600L}) {
                MatchConfig mc;
                mc.stage_window = std::chrono::seconds{w};
                const auto cur = extract_sequences(evs, dir, mc);
                if (!prev.empty()) {
                    REQUIRE(cur.size() == prev.size());
                    for (std::size_t i = 0; i < cur.size(); ++i) {
                        const auto a = prev[i].ports_reached();
                        const auto b = cur[i].ports_reached();
                        CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
                    }
                }
                prev = cur;
            }
        }
    }
}

TEST_CASE("role precedence is total over every combination of evidence") {
    const HostId host = kSahib;
    auto victim = [&](bool t4444, bool t69, bool launched) {
        VictimMatch v;
        v.host = host;
        v.sequence.peer = kTarmizi.ip;
        v.sequence.t135 = lab_time("14:41:09");
        if (t4444) v.sequence.t4444 = lab_time("14:41:11");
        if (t69) v.sequence.t69 = lab_time("14:41:12");
        if (launched) v.worm_launch = lab_time("14:41:25");
        v.completeness = launched ? Completeness::Full : t69 ? Completeness::Transferred : Completeness::PortsOnly;
        return v;
    };
    AttackerMatch attacker;
    attacker.host = host;
    ExploitSequence out;
    out.peer = kYusof.ip;
    out.direction = Direction::Outbound;
    out.t135 = lab_time("14:45:24");
    attacker.sequences = {out};

    for (unsigned bits = 0; bits < 64; ++bits) {
        CAPTURE(bits);
        const bool scanned = bits & 1, shell = bits & 2, transferred = bits & 4, full = bits & 8;
        const bool attacks = bits & 16, multi = bits & 32;
        std::vector<VictimMatch> v;
        if (scanned) v.push_back(victim(false, false, false));
        if (shell) v.push_back(victim(true, false, false));
        if (transferred) v.push_back(victim(true, true, false));
        if (full) v.push_back(victim(true, true, true));
        std::optional<AttackerMatch> a;
        if (attacks) a = attacker;
        std::optional<MultiStepMatch> m;
        if (multi) m = MultiStepMatch{host, victim(true, true, true), attacker, std::nullopt};

        Role expected = Role::Clean;
        if (multi) expected = Role::MultiStep;
        else if (attacks) expected = Role::Attacker;
        else if (full) expected = Role::Victim;
        else if (shell || transferred) expected = Role::PartiallyExploited;
        else if (scanned) expected = Role::Scanned;

        const auto r = classify_host(host, v, a, m);
        CHECK(r.role == expected);
        CHECK(r.origin == (!multi && attacks && !full));
    }
}

TEST_CASE("roles only rise as a host's log grows") {
    for (const auto& cfg : configs(106, false)) {
        const auto run = simulate_and_analyze(cfg);
        const auto ids = run.corpus.store.ids_alerts();
        const auto& mc = run.analysis.config;
        for (const auto& h : run.corpus.store.hosts()) {
            const auto evs = run.corpus.store.events_for_host(h);
            int prev = -1;
            for (std::size_t cut : {evs.size() / 8, evs.size() / 4, evs.size() / 2, evs.size() * 3 / 4, evs.size()}) {
                const std::vector<NormalizedEvent> prefix(evs.begin(), evs.begin() + static_cast<std::ptrdiff_t>(cut));
                const int r = rank(analyze_host(h, prefix, ids, mc).role);
                CHECK(r >= prev);
                prev = r;
            }
        }
    }
}

TEST_CASE("either side's evidence alone recovers the same edges") {
    for (const auto& cfg : configs(107, true)) {
        const auto run = simulate_and_analyze(cfg);
        std::vector<HostRole> victim_only, attacker_only;
        for (const auto& r : run.analysis.roles) {
            victim_only.push_back(classify_host(r.host, r.evidence.victim, std::nullopt, std::nullopt));
            attacker_only.push_back(classify_host(r.host, {}, r.evidence.attacker, std::nullopt));
        }
        const auto& mc = run.analysis.config;
        const auto truth = edge_keys(run.sim.truth);
        CHECK(edge_keys(build_scenario(attacker_only, mc)) == truth);
        std::multiset<EdgeKey> to_corpus;
        for (const auto& e : run.sim.truth.edges)
            if (run.corpus.store.find_host_by_ip(e.to) && !target_down(cfg, run.sim.truth, e.to, e.t135))
                to_corpus.insert({e.from, e.to, e.ports_reached});
        CHECK(edge_keys(build_scenario(victim_only, mc)) == to_corpus);
        CHECK(edge_keys(run.analysis.graph) == truth);
    }
}

TEST_CASE("exactly one origin, and nothing infects it") {
    for (const auto& cfg : configs(108, true)) {
        const auto run = simulate_and_analyze(cfg);
        std::vector<HostId> origins;
        for (const auto& r : run.analysis.roles)
            if (r.origin) {
                CHECK(r.role == Role::Attacker);
                origins.push_back(r.host);
            }
        REQUIRE(origins.size() == 1);
        CHECK(origins[0].name == cfg.seed_attacker);
        for (const auto& e : run.analysis.graph.edges)
            CHECK_FALSE((e.to == origins[0].ip && e.ports_reached == PortSet{135, 4444, 69}));
    }
}

TEST_CASE("IDS evidence is conserved") {
    for (const auto& cfg : configs(109, true)) {
        const auto run = simulate_and_analyze(cfg);
        const auto ids = run.corpus.store.ids_alerts();
        const auto gets = std::count_if(ids.begin(), ids.end(), [](const IdsAlert& a) { return is_tftp_get(a); });
        CHECK(static_cast<std::size_t>(gets) == run.sim.truth.tftp_transfers);
        std::set<Ipv4> sweepers, scanners;
        std::size_t sweeps = 0;
        for (const auto& a : ids)
            if (is_portsweep(a)) {
                sweepers.insert(a.src_ip);
                ++sweeps;
            }
        for (const auto& name : run.sim.truth.scanners) scanners.insert(cfg.find(name)->ip);
        CHECK(sweeps == run.sim.truth.scanners.size());
        CHECK(sweepers == scanners);
    }
}

TEST_CASE("every session's local side is the logging host") {
    for (const auto& cfg : configs(110, true)) {
        const auto corpus = load_corpus(simulate(cfg).files);
        for (const auto& h : corpus.store.hosts())
            for (const auto& ev : corpus.store.events_for_host(h)) {
                const auto* f = std::get_if<FirewallEvent>(&ev);
                if (!f || (f->action != FirewallAction::Open && f->action != FirewallAction::OpenInbound)) continue;
                CHECK(infer_ip_roles(*f).local == h.ip);
            }
    }
}

TEST_CASE("infection precedes relaying and follows a full attempt") {
    for (const auto& cfg : configs(111, false)) {
        const auto sim = simulate(cfg);
        const auto& truth = sim.truth;
        for (const auto& [name, infected_at] : truth.infection_times) {
            CAPTURE(name);
            const auto target = cfg.find(name)->ip;
            bool delivered = false;
            for (const auto& e : truth.edges) {
                if (e.to == target && e.ports_reached == PortSet{135, 4444, 69} && e.t135 < infected_at)
                    delivered = true;
                if (e.from == target) CHECK(e.t135 > infected_at);
            }
            CHECK(delivered);
        }
    }
}

TEST_CASE("timeline never goes backwards") {
    for (const auto& cfg : configs(112, true)) {
        const auto run = simulate_and_analyze(cfg);
        const auto t = topological_timeline(run.analysis.graph);
        CHECK(t.size() == run.analysis.graph.edges.size());
        for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i - 1].first <= t[i].first);
    }
}

TEST_CASE("reports survive a JSON round trip") {
    for (const auto& cfg : configs(113, true)) {
        const auto run = simulate_and_analyze(cfg);
        const auto report = make_report(run.corpus, run.analysis);
        const auto text = report_to_json(report);
        CHECK(report_from_json(text) == report);
        CHECK(render_dot(graph_from_report(report)) == render_dot(run.analysis.graph));
        CHECK(ground_truth_from_json(ground_truth_to_json(run.sim.truth)) == run.sim.truth);
    }
}
