// wormtrace: parse logs, analyze a corpus, simulate an outbreak, print a report.
// Exit codes: 0 ok, 1 usage or I/O, 2 strict parse failure, 3 anomalies with --fail-on-anomaly.

#include "wormtrace/corpus.hpp"
#include "wormtrace/report.hpp"
#include "wormtrace/worm_simulator.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace wormtrace;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitAnomaly = 3;

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed: " + path.string());
}

struct ParseArgs {
    std::string path;
    std::string type;
    std::string host;
    std::string ip = "0.0.0.0";
    bool strict = false;
    std::optional<int> year;
};

int cmd_parse(const ParseArgs& a) {
    if (!fs::is_regular_file(a.path)) {
        std::cerr << "error: cannot read " << a.path << "\n";
        return kExitUsage;
    }
    const std::string text = read_file(a.path);
    ParseReport report;
    if (a.type == "ids") {
        report = parse_ids_alert_log(text, YearHint{a.year.value_or(1970)}, a.strict);
    } else {
        if (a.host.empty()) {
            std::cerr << "error: --host is required for --type " << a.type << "\n";
            return kExitUsage;
        }
        const auto ip = Ipv4::parse(a.ip);
        if (!ip) {
            std::cerr << "error: invalid --ip " << a.ip << "\n";
            return kExitUsage;
        }
        const HostId host{a.host, *ip};
        if (a.type == "firewall")
            report = parse_firewall_log(text, host, a.strict);
        else if (a.type == "security")
            report = parse_event_log(text, host, EventLogKind::Security, a.strict);
        else if (a.type == "system")
            report = parse_event_log(text, host, EventLogKind::System, a.strict);
        else
            report = parse_event_log(text, host, EventLogKind::Application, a.strict);
    }
    for (const auto& ev : report.events) std::cout << event_to_json(ev) << "\n";
    for (const auto& s : report.skipped) std::cerr << "skipped: " << a.path << ": line " << s.line_number << ": " << s.reason << "\n";
    return kExitOk;
}

struct AnalyzeArgs {
    std::string corpus;
    std::string out = "report.json";
    std::string dot;
    std::optional<long> window;
    std::optional<long> skew;
    std::optional<int> year;
    bool strict = false;
    bool fail_on_anomaly = false;
    bool quiet = false;
};

int cmd_analyze(const AnalyzeArgs& a) {
    const auto corpus = load_corpus(a.corpus, {a.strict, a.year});
    MatchOverrides cli;
    if (a.window) cli.stage_window = std::chrono::seconds{*a.window};
    if (a.skew) cli.ids_skew = std::chrono::seconds{*a.skew};
    const auto analysis = analyze(corpus, effective_config(corpus.manifest, cli));
    const auto report = make_report(corpus, analysis);
    write_text(a.out, report_to_json(report));
    if (!a.dot.empty()) write_text(a.dot, render_dot(analysis.graph));
    if (!a.quiet) std::cout << render_summary(report);
    for (const auto& f : corpus.files)
        for (const auto& s : f.skipped) std::cerr << "skipped: " << f.path << ": line " << s.line_number << ": " << s.reason << "\n";
    if (a.fail_on_anomaly && !report.anomalies.empty()) return kExitAnomaly;
    return kExitOk;
}

struct SimulateArgs {
    std::optional<std::size_t> hosts;
    std::string topology;
    bool testbed = false;
    std::uint64_t seed = 0;
    std::optional<double> prob;
    std::optional<long> duration;
    std::optional<long> ids_offset;
    std::optional<std::uint32_t> noise;
    std::vector<std::string> fail;
    std::string out;
    bool force = false;
};

int cmd_simulate(const SimulateArgs& a) {
    SimulationConfig cfg;
    if (!a.topology.empty()) {
        cfg = config_from_json(read_file(a.topology));
    } else if (a.testbed) {
        cfg = testbed_config(a.seed);
    } else {
        cfg = default_config(a.hosts.value_or(8), a.seed);
    }
    if (a.topology.empty() || a.seed) cfg.rng_seed = a.seed;
    if (a.prob) cfg.transfer_success_prob = *a.prob;
    if (a.duration) cfg.duration = std::chrono::seconds{*a.duration};
    if (a.ids_offset) cfg.ids_clock_offset = std::chrono::seconds{*a.ids_offset};
    if (a.noise) cfg.noise_lines_per_host = *a.noise;
    for (const auto& name : a.fail) {
        auto it = std::find_if(cfg.hosts.begin(), cfg.hosts.end(),
                               [&](const SimHost& h) { return to_lower(h.name) == to_lower(name); });
        if (it == cfg.hosts.end()) throw ConfigError("--fail names unknown host '" + name + "'");
        it->transfer_success_prob = 0.0;
    }
    const auto result = simulate(cfg);
    write_corpus(a.out, result.files, a.force);
    std::cout << "wrote " << result.files.size() << " files to " << a.out << "\n";
    for (const auto& [name, role] : result.truth.roles)
        std::cout << "  " << name << "  " << to_string(role.role) << (role.origin ? " (origin)" : "") << "\n";
    return kExitOk;
}

int cmd_report(const std::string& path, const std::string& dot) {
    const auto report = report_from_json(read_file(path));
    std::cout << render_summary(report);
    if (!dot.empty()) write_text(dot, render_dot(graph_from_report(report)));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Blaster worm forensic trace analysis and outbreak simulation"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    ParseArgs pa;
    auto* parse = app.add_subcommand("parse", "Parse one log file and print events as JSON lines");
    parse->add_option("path", pa.path, "Log file")->required();
    parse->add_option("--type", pa.type, "Log type")
        ->required()
        ->check(CLI::IsMember({"firewall", "security", "system", "application", "ids"}));
    parse->add_option("--host", pa.host, "Host name (host log types)");
    parse->add_option("--ip", pa.ip, "Host address (host log types)");
    parse->add_flag("--strict", pa.strict, "Fail on the first malformed unit");
    parse->add_option("--year", pa.year, "Year for IDS timestamps")->check(CLI::Range(1970, 9999));

    AnalyzeArgs aa;
    auto* an = app.add_subcommand("analyze", "Classify hosts and reconstruct the scenario of a corpus");
    an->add_option("--corpus", aa.corpus, "Corpus directory")->required();
    an->add_option("--out", aa.out, "Report JSON path")->capture_default_str();
    an->add_option("--dot", aa.dot, "Scenario graph DOT path");
    an->add_option("--window", aa.window, "Stage window in seconds")->check(CLI::PositiveNumber);
    an->add_option("--skew", aa.skew, "IDS skew tolerance in seconds")->check(CLI::PositiveNumber);
    an->add_option("--year", aa.year, "Year for IDS timestamps")->check(CLI::Range(1970, 9999));
    an->add_flag("--strict", aa.strict, "Fail on the first malformed unit");
    an->add_flag("--fail-on-anomaly", aa.fail_on_anomaly, "Exit 3 when anomalies are reported");
    an->add_flag("--quiet", aa.quiet, "Do not print the summary");

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Simulate an outbreak and write a labeled corpus");
    auto* hosts_opt = sim->add_option("--hosts", sa.hosts, "Number of hosts on one /24")->check(CLI::Range(2, 240));
    auto* topo_opt = sim->add_option("--topology", sa.topology, "Topology JSON file")->check(CLI::ExistingFile);
    auto* testbed_opt = sim->add_flag("--testbed", sa.testbed, "Eight-host, three-subnet testbed");
    hosts_opt->excludes(topo_opt)->excludes(testbed_opt);
    topo_opt->excludes(testbed_opt);
    sim->add_option("--seed", sa.seed, "RNG seed");
    sim->add_option("--prob", sa.prob, "Transfer success probability")->check(CLI::Range(0.0, 1.0));
    sim->add_option("--duration", sa.duration, "Simulated seconds")->check(CLI::PositiveNumber);
    sim->add_option("--ids-offset", sa.ids_offset, "IDS clock offset in seconds");
    sim->add_option("--noise", sa.noise, "Benign lines per host");
    sim->add_option("--fail", sa.fail, "Host whose transfer always fails (repeatable)");
    sim->add_option("--out", sa.out, "Output directory")->required();
    sim->add_flag("--force", sa.force, "Overwrite a non-empty output directory");

    std::string report_path, report_dot;
    auto* rep = app.add_subcommand("report", "Print the summary of a report JSON");
    rep->add_option("--report", report_path, "Report JSON path")->required();
    rep->add_option("--dot", report_dot, "Re-render the scenario graph to this DOT path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*parse) return cmd_parse(pa);
        if (*an) return cmd_analyze(aa);
        if (*sim) return cmd_simulate(sa);
        if (*rep) return cmd_report(report_path, report_dot);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
