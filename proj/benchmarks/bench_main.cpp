// SPDX-License-Identifier: Apache-2.0
#include "jitscan/code_graph.hpp"
#include "jitscan/evaluation.hpp"
#include "jitscan/history.hpp"
#include "jitscan/retrieval.hpp"

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

using namespace jitscan;

namespace {

/// One file with `n` functions forming a call chain, ~5 lines each.
std::string synth_source(int n) {
    std::string out;
    for (int i = 0; i < n; ++i) {
        std::string name = "fn_" + std::to_string(i);
        std::string callee = "fn_" + std::to_string((i + 1) % n);
        out += "int " + name + "(int value) {\n";
        out += "    int acc = value * " + std::to_string(i + 1) + "; // scale\n";
        out += "    if (acc > 100) acc -= " + std::to_string(i) + ";\n";
        out += "    return " + callee + "(acc) + acc;\n";
        out += "}\n\n";
    }
    return out;
}

std::vector<graph::SourceFile> synth_snapshot(int files, int fns_per_file) {
    std::vector<graph::SourceFile> out;
    for (int f = 0; f < files; ++f)
        out.push_back({"src/f" + std::to_string(f) + ".c", synth_source(fns_per_file)});
    return out;
}

void BM_extract_functions(benchmark::State& state) {
    graph::SourceFile file{"a.c", synth_source(int(state.range(0)))};
    for (auto _ : state) {
        auto fns = graph::extract_functions(file);
        benchmark::DoNotOptimize(fns);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_extract_functions)->Arg(10)->Arg(100)->Arg(1000);

void BM_build_graph(benchmark::State& state) {
    auto snapshot = synth_snapshot(int(state.range(0)), 50);
    for (auto _ : state) {
        auto g = graph::build_graph(snapshot, "bench");
        benchmark::DoNotOptimize(g);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 50);
}
BENCHMARK(BM_build_graph)->Arg(1)->Arg(8)->Arg(32);

void BM_normalize_body(benchmark::State& state) {
    std::string body = synth_source(int(state.range(0)));
    for (auto _ : state) {
        auto n = history::normalize_body(body);
        benchmark::DoNotOptimize(n);
    }
    state.SetBytesProcessed(state.iterations() * body.size());
}
BENCHMARK(BM_normalize_body)->Arg(1)->Arg(50);

void BM_tokenize(benchmark::State& state) {
    std::string body = synth_source(int(state.range(0)));
    for (auto _ : state) {
        auto t = retrieval::tokenize(body);
        benchmark::DoNotOptimize(t);
    }
    state.SetBytesProcessed(state.iterations() * body.size());
}
BENCHMARK(BM_tokenize)->Arg(1)->Arg(50);

void BM_top_k_dependencies(benchmark::State& state) {
    auto g = graph::build_graph(synth_snapshot(4, int(state.range(0))), "bench");
    const auto& target = g.functions().front();
    for (auto _ : state) {
        auto deps = retrieval::top_k_dependencies(g, target, 5);
        benchmark::DoNotOptimize(deps);
    }
}
BENCHMARK(BM_top_k_dependencies)->Arg(50)->Arg(200);

void BM_build_report(benchmark::State& state) {
    std::vector<eval::PredictionRecord> records;
    for (int i = 0; i < state.range(0); ++i) {
        eval::PredictionRecord r;
        r.sample_id = "s" + std::to_string(i / 2);
        r.version = i % 2 == 0 ? eval::Label::vul : eval::Label::ben;
        r.truth = r.version;
        r.predicted = i % 3 == 0 ? eval::Label::vul : eval::Label::ben;
        r.truth_cwe = "CWE-120";
        r.tool_invocations = i % 7;
        records.push_back(std::move(r));
    }
    for (auto _ : state) {
        auto report = eval::build_report(records);
        benchmark::DoNotOptimize(report);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_build_report)->Arg(100)->Arg(10000);

} // namespace

BENCHMARK_MAIN();
