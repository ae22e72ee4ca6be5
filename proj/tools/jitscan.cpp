// SPDX-License-Identifier: Apache-2.0
#include "jitscan/agent.hpp"
#include "jitscan/code_graph.hpp"
#include "jitscan/harness.hpp"
#include "jitscan/history.hpp"
#include "jitscan/retrieval.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>

namespace {

using namespace jitscan;

agent::Strategy parse_strategy(const std::string& name) {
    if (name == "vanilla") return {};
    if (name == "cot") return {.cot = true, .few_shot = false};
    if (name == "fs") return {.cot = false, .few_shot = true};
    if (name == "cot_fs" || name == "cot+fs") return {.cot = true, .few_shot = true};
    throw CLI::ValidationError("--strategy", "expected vanilla|cot|fs|cot_fs, got " + name);
}

agent::DetectorKind parse_detector(const std::string& name) {
    if (name == "plain") return agent::DetectorKind::plain;
    if (name == "dep_aug") return agent::DetectorKind::dep_aug;
    if (name == "react") return agent::DetectorKind::react;
    throw CLI::ValidationError("--detector", "expected plain|dep_aug|react, got " + name);
}

graph::CallGraph load_or_build(const std::string& snapshot_dir, const std::string& graph_file) {
    auto files = graph::load_snapshot_dir(snapshot_dir);
    if (graph_file.empty()) return graph::build_graph(std::move(files), snapshot_dir);
    std::ifstream in(graph_file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read graph file: " + graph_file);
    std::ostringstream buf;
    buf << in.rdbuf();
    return graph::load_graph(buf.str(), files);
}

int cmd_graph_build(const std::string& snapshot_dir, const std::string& out_path) {
    auto g = graph::build_graph(graph::load_snapshot_dir(snapshot_dir), snapshot_dir);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << g.to_json() << '\n';
    std::cout << "functions: " << g.functions().size() << ", edges: " << g.edges().size()
              << ", diagnostics: " << g.diagnostics().size() << '\n';
    return 0;
}

int cmd_graph_query(agent::ToolKind tool, const std::string& name, std::optional<int> line,
                    const std::string& snapshot_dir, const std::string& graph_file) {
    auto g = load_or_build(snapshot_dir, graph_file);
    agent::ToolCall call{tool, name, line};
    std::cout << agent::dispatch_tool(g, call) << '\n';
    return 0;
}

int cmd_graph_deps(const std::string& name, int k, bool per_relation,
                   const std::string& snapshot_dir, const std::string& graph_file) {
    auto g = load_or_build(snapshot_dir, graph_file);
    auto q = g.get_definition(name);
    if (q.status == graph::DefinitionQuery::Status::not_found) {
        std::cout << "Error: function '" << name << "' not found.\n";
        return 1;
    }
    auto deps = retrieval::top_k_dependencies(
        g, *q.def, k,
        per_relation ? retrieval::PoolMode::per_relation : retrieval::PoolMode::shared);
    if (deps.empty()) {
        std::cout << "(no dependencies retrieved)\n";
        return 0;
    }
    for (const auto& d : deps) {
        std::cout << std::fixed << std::setprecision(4) << d.score << "  "
                  << (d.relation == retrieval::Relation::caller ? "caller" : "callee") << "  "
                  << d.function->name << "  " << d.function->file << ":"
                  << d.function->start_line << '\n';
    }
    return 0;
}

int cmd_pair_build(const std::string& manifest_path, const std::string& history_root,
                   bool git_mode, const std::string& out_dir) {
    auto entries = history::read_manifest(manifest_path);

    std::vector<history::SampleResult> results;
    for (const auto& entry : entries) {
        std::string root = entry.repo.empty() ? history_root : entry.repo;
        std::unique_ptr<history::SnapshotProvider> provider;
        try {
            if (git_mode)
                provider = std::make_unique<history::GitSnapshotProvider>(root);
            else
                provider = std::make_unique<history::DirectoryHistoryProvider>(root);
            results.push_back(history::build_pairwise_sample(entry, *provider));
        } catch (const std::exception& e) {
            history::SampleResult r;
            r.sample.cve_id = entry.cve_id;
            r.reject_reason = std::string("ProviderError: ") + e.what();
            results.push_back(std::move(r));
        }
    }
    history::write_samples(out_dir, results);

    std::size_t accepted = 0;
    for (const auto& r : results)
        if (r.accepted) ++accepted;
    std::cout << "accepted: " << accepted << ", rejected: " << results.size() - accepted << '\n';
    return 0;
}

int cmd_run(const harness::RunConfig& config, const std::string& samples_dir) {
    auto samples = history::load_samples(samples_dir);
    auto artifact = harness::run_benchmark(samples, config);
    std::cout << "records: " << artifact.records.size() << ", aborts: " << artifact.aborts.size()
              << ", output: " << artifact.output_dir << '\n';
    return 0;
}

int cmd_eval(const std::string& run_dir, const std::string& format,
             const std::string& histogram_csv) {
    auto report = harness::evaluate_run(run_dir);
    if (format == "json") std::cout << report.to_json() << '\n';
    else std::cout << report.to_table();
    if (!histogram_csv.empty()) {
        std::ofstream out(histogram_csv, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + histogram_csv);
        out << report.histogram_csv();
    }
    return 0;
}

int cmd_scan(const std::string& snapshot_dir, const std::string& known_path,
             const harness::RunConfig& config) {
    auto g = graph::build_graph(graph::load_snapshot_dir(snapshot_dir), snapshot_dir);
    auto known = harness::read_known_list(known_path);
    auto scan = harness::scan_snapshot(g, known, config);
    if (!config.output_dir.empty()) harness::write_scan_result(config.output_dir, scan);

    auto metrics = eval::compute_detection_metrics(scan);
    std::cout << std::fixed << std::setprecision(4) << "detected " << scan.detected_known << "/"
              << scan.total_known << ", marked " << scan.marked << "/" << scan.total_functions
              << ", vdr " << metrics.vdr << ", mfr " << metrics.mfr << ", dpi " << metrics.dpi
              << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"jitscan: repository-level just-in-time vulnerability detection toolkit"};
    app.require_subcommand(1);

    // graph
    auto* graph_cmd = app.add_subcommand("graph", "Build and query caller/callee graphs");
    graph_cmd->require_subcommand(1);

    std::string snapshot_dir, out_path = "graph.json", graph_file;
    auto* build = graph_cmd->add_subcommand("build", "Extract a snapshot into a graph JSON file");
    build->add_option("snapshot-dir", snapshot_dir, "Snapshot directory")->required();
    build->add_option("-o,--output", out_path, "Output JSON path");

    auto* query = graph_cmd->add_subcommand("query", "Query a snapshot's graph");
    query->require_subcommand(1);
    std::string fn_name;
    int line_opt = -1;
    int k = 5;
    bool per_relation = false;

    auto add_common = [&](CLI::App* sub, bool with_line) {
        sub->add_option("name", fn_name, "Function name")->required();
        sub->add_option("--snapshot", snapshot_dir, "Snapshot directory")->required();
        sub->add_option("--graph", graph_file, "Optional pre-built graph JSON");
        if (with_line) sub->add_option("--line", line_opt, "Disambiguating line number");
    };
    auto* q_callers = query->add_subcommand("callers", "List call sites of a function");
    add_common(q_callers, false);
    auto* q_callees = query->add_subcommand("callees", "List functions a definition calls");
    add_common(q_callees, true);
    auto* q_def = query->add_subcommand("def", "Show a function definition");
    add_common(q_def, true);
    auto* q_deps = query->add_subcommand("deps", "Rank similar callers/callees");
    add_common(q_deps, false);
    q_deps->add_option("-k", k, "How many dependencies");
    q_deps->add_flag("--per-relation", per_relation, "k callers plus k callees");

    // pair
    auto* pair_cmd = app.add_subcommand("pair", "Construct pairwise samples");
    pair_cmd->require_subcommand(1);
    std::string manifest_path, history_root, samples_out = "samples";
    bool git_mode = false;
    auto* pair_build = pair_cmd->add_subcommand("build", "Build samples from a manifest");
    pair_build->add_option("--manifest", manifest_path, "Manifest JSONL")->required();
    pair_build->add_option("--history-root", history_root,
                           "History root (fallback when an entry's repo is empty)");
    pair_build->add_flag("--git", git_mode, "Treat repositories as git checkouts");
    pair_build->add_option("-o,--output", samples_out, "Output sample directory");

    // run
    auto* run_cmd = app.add_subcommand("run", "Run a detector over a sample set");
    std::string detector = "plain", strategy = "vanilla", samples_dir, script_path,
                run_out = "out", templates_dir = "templates";
    int max_iterations = 10, parallelism = 1;
    bool use_gateway = false;
    run_cmd->add_option("--detector", detector, "plain|dep_aug|react");
    run_cmd->add_option("--strategy", strategy, "vanilla|cot|fs|cot_fs");
    run_cmd->add_option("--samples", samples_dir, "Sample directory")->required();
    run_cmd->add_option("--script", script_path, "Scripted backend JSONL");
    run_cmd->add_flag("--gateway", use_gateway, "Use the HTTP gateway backend");
    run_cmd->add_option("-o,--output", run_out, "Run output directory");
    run_cmd->add_option("--max-iterations", max_iterations, "Agent iteration cap");
    run_cmd->add_option("-k", k, "Dependencies per prompt (dep_aug)");
    run_cmd->add_flag("--per-relation", per_relation, "k callers plus k callees");
    run_cmd->add_option("--parallelism", parallelism, "Concurrent samples");
    run_cmd->add_option("--templates", templates_dir, "Prompt template directory");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Aggregate a run into metrics");
    std::string run_dir, format = "table", histogram_csv;
    eval_cmd->add_option("run-dir", run_dir, "Run output directory")->required();
    eval_cmd->add_option("--format", format, "table|json");
    eval_cmd->add_option("--histogram-csv", histogram_csv, "Write tool histogram CSV here");

    // scan
    auto* scan_cmd = app.add_subcommand("scan", "Scan every function of a snapshot");
    std::string known_path;
    scan_cmd->add_option("snapshot-dir", snapshot_dir, "Snapshot directory")->required();
    scan_cmd->add_option("--known", known_path, "Known vulnerabilities JSONL")->required();
    scan_cmd->add_option("--detector", detector, "plain|dep_aug|react");
    scan_cmd->add_option("--strategy", strategy, "vanilla|cot|fs|cot_fs");
    scan_cmd->add_option("--script", script_path, "Scripted backend JSONL");
    scan_cmd->add_flag("--gateway", use_gateway, "Use the HTTP gateway backend");
    scan_cmd->add_option("-o,--output", run_out, "Where to write scan_result.json");
    scan_cmd->add_option("--max-iterations", max_iterations, "Agent iteration cap");
    scan_cmd->add_option("--templates", templates_dir, "Prompt template directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*build) return cmd_graph_build(snapshot_dir, out_path);

        std::optional<int> line;
        if (line_opt >= 0) line = line_opt;
        if (*q_callers)
            return cmd_graph_query(agent::ToolKind::get_callers, fn_name, line, snapshot_dir,
                                   graph_file);
        if (*q_callees)
            return cmd_graph_query(agent::ToolKind::get_callees, fn_name, line, snapshot_dir,
                                   graph_file);
        if (*q_def)
            return cmd_graph_query(agent::ToolKind::get_definition, fn_name, line, snapshot_dir,
                                   graph_file);
        if (*q_deps) return cmd_graph_deps(fn_name, k, per_relation, snapshot_dir, graph_file);

        if (*pair_build) return cmd_pair_build(manifest_path, history_root, git_mode, samples_out);

        if (*run_cmd || *scan_cmd) {
            harness::RunConfig config;
            config.detector = parse_detector(detector);
            config.strategy = parse_strategy(strategy);
            config.script_path = script_path;
            config.use_gateway = use_gateway;
            config.max_iterations = max_iterations;
            config.k = k;
            config.pool_mode = per_relation ? retrieval::PoolMode::per_relation
                                            : retrieval::PoolMode::shared;
            config.parallelism = parallelism;
            config.output_dir = run_out;
            config.templates_dir = templates_dir;
            if (*run_cmd) return cmd_run(config, samples_dir);
            return cmd_scan(snapshot_dir, known_path, config);
        }

        if (*eval_cmd) return cmd_eval(run_dir, format, histogram_csv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
