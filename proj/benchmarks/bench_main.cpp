#include "wormtrace/corpus.hpp"
#include "wormtrace/report.hpp"
#include "wormtrace/worm_simulator.hpp"

#include <benchmark/benchmark.h>

using namespace wormtrace;

namespace {

const SimulationResult& noisy_outbreak(std::size_t hosts) {
    static std::map<std::size_t, SimulationResult> cache;
    auto it = cache.find(hosts);
    if (it == cache.end()) {
        auto cfg = default_config(hosts, 1);
        cfg.noise_lines_per_host = 500;
        it = cache.emplace(hosts, simulate(cfg)).first;
    }
    return it->second;
}

HostId first_host(const SimulationResult& sim) {
    const auto m = manifest_from_json(sim.files.at(std::string(kManifestFile)));
    return {m.hosts.front().name, m.hosts.front().ip};
}

void BM_parse_firewall(benchmark::State& state) {
    const auto& sim = noisy_outbreak(16);
    const auto host = first_host(sim);
    const auto& text = sim.files.at(host.name + "/pfirewall.log");
    for (auto _ : state) benchmark::DoNotOptimize(parse_firewall_log(text, host, true));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_parse_firewall);

void BM_parse_security(benchmark::State& state) {
    const auto& sim = noisy_outbreak(16);
    const auto host = first_host(sim);
    const auto& text = sim.files.at(host.name + "/security.log");
    for (auto _ : state) benchmark::DoNotOptimize(parse_event_log(text, host, EventLogKind::Security, true));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_parse_security);

void BM_parse_ids(benchmark::State& state) {
    const auto& text = noisy_outbreak(16).files.at(std::string(kDefaultIdsLog));
    for (auto _ : state) benchmark::DoNotOptimize(parse_ids_alert_log(text, YearHint{2009}, true));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_parse_ids);

void BM_simulate(benchmark::State& state) {
    const auto cfg = default_config(static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state) benchmark::DoNotOptimize(simulate(cfg));
}
BENCHMARK(BM_simulate)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_load_and_analyze(benchmark::State& state) {
    const auto& sim = noisy_outbreak(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        const auto corpus = load_corpus(sim.files);
        benchmark::DoNotOptimize(analyze(corpus, effective_config(corpus.manifest)));
    }
}
BENCHMARK(BM_load_and_analyze)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_report_and_dot(benchmark::State& state) {
    const auto corpus = load_corpus(noisy_outbreak(16).files);
    const auto analysis = analyze(corpus, effective_config(corpus.manifest));
    for (auto _ : state) {
        benchmark::DoNotOptimize(report_to_json(make_report(corpus, analysis)));
        benchmark::DoNotOptimize(render_dot(analysis.graph));
    }
}
BENCHMARK(BM_report_and_dot)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
