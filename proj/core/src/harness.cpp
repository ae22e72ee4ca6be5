// SPDX-License-Identifier: Apache-2.0
#include "jitscan/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

namespace jitscan::harness {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 14695981039346656037ull) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string to_hex(std::uint64_t v) {
    std::ostringstream out;
    out << std::hex << v;
    return out.str();
}

std::string_view detector_name(agent::DetectorKind d) {
    switch (d) {
    case agent::DetectorKind::plain: return "plain";
    case agent::DetectorKind::dep_aug: return "dep_aug";
    case agent::DetectorKind::react: return "react";
    }
    return "unknown";
}

/// Content-hash keyed cache so the vul/ben snapshots of one sample (which
/// share most files) build a graph only once per distinct content.
class GraphCache {
public:
    std::shared_ptr<const graph::CallGraph> get(const std::string& dir) {
        {
            std::lock_guard lock(mu_);
            auto it = by_dir_.find(dir);
            if (it != by_dir_.end()) return it->second;
        }
        auto files = graph::load_snapshot_dir(dir);
        std::uint64_t h = 14695981039346656037ull;
        for (const auto& f : files) {
            h = fnv1a(f.path, h);
            h = fnv1a(std::string_view("\0", 1), h);
            h = fnv1a(f.text, h);
            h = fnv1a(std::string_view("\0", 1), h);
        }
        std::lock_guard lock(mu_);
        auto hit = by_content_.find(h);
        if (hit != by_content_.end()) {
            by_dir_[dir] = hit->second;
            return hit->second;
        }
        auto g = std::make_shared<const graph::CallGraph>(
            graph::build_graph(std::move(files), "content:" + to_hex(h)));
        by_content_[h] = g;
        by_dir_[dir] = g;
        return g;
    }

private:
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<const graph::CallGraph>> by_dir_;
    std::map<std::uint64_t, std::shared_ptr<const graph::CallGraph>> by_content_;
};

const graph::FunctionDef* find_target(const graph::CallGraph& g, const std::string& file,
                                      const std::string& name) {
    for (const auto& f : g.functions())
        if (f.name == name && f.file == file) return &f;
    return nullptr;
}

agent::DetectorResult run_detector(const RunConfig& config, agent::ModelBackend& backend,
                                   const agent::PromptLibrary& prompts,
                                   const graph::CallGraph& g, const graph::FunctionDef& target) {
    switch (config.detector) {
    case agent::DetectorKind::plain:
        return agent::run_plain(backend, prompts, config.strategy, target.body);
    case agent::DetectorKind::dep_aug:
        return agent::run_dep_aug(backend, prompts, config.strategy, g, target, config.k,
                                  config.pool_mode);
    case agent::DetectorKind::react:
        return agent::run_react(backend, prompts, config.strategy, g, target,
                                config.max_iterations);
    }
    throw std::runtime_error("unknown detector kind");
}

std::string canonical_config(const RunConfig& c) {
    std::ostringstream out;
    out << "detector=" << detector_name(c.detector) << ";strategy=" << c.strategy.name()
        << ";script=" << c.script_path << ";gateway=" << (c.use_gateway ? 1 : 0)
        << ";max_iterations=" << c.max_iterations << ";k=" << c.k << ";pool="
        << (c.pool_mode == retrieval::PoolMode::shared ? "shared" : "per_relation")
        << ";parallelism=" << c.parallelism << ";templates=" << c.templates_dir
        << ";temperature=" << c.temperature;
    return out.str();
}

json record_to_json(const eval::PredictionRecord& r) {
    json line = {{"sample_id", r.sample_id},
                 {"version", r.version == eval::Label::vul ? "vul" : "ben"},
                 {"truth", r.truth == eval::Label::vul ? "vul" : "ben"},
                 {"predicted", r.predicted == eval::Label::vul ? "vul" : "ben"},
                 {"predicted_cwe", r.predicted_cwe ? json(*r.predicted_cwe) : json()},
                 {"truth_cwe", r.truth_cwe},
                 {"tool_invocations", r.tool_invocations},
                 {"fallback", r.fallback_flag}};
    return line;
}

eval::Label label_from(const std::string& s) {
    return s == "vul" ? eval::Label::vul : eval::Label::ben;
}

} // namespace

std::string config_hash(const RunConfig& config) { return to_hex(fnv1a(canonical_config(config))); }

std::string_view toolkit_version() {
#ifdef JITSCAN_VERSION
    return JITSCAN_VERSION;
#else
    return "0.0.0";
#endif
}

RunArtifact run_benchmark(const std::vector<history::PairwiseSample>& samples,
                          const RunConfig& config) {
    if (config.output_dir.empty()) throw std::runtime_error("output directory not set");
    if (config.parallelism < 1) throw std::runtime_error("parallelism must be >= 1");

    auto prompts = agent::PromptLibrary::load(config.templates_dir);

    std::unique_ptr<agent::ScriptedBackend> scripted;
    std::unique_ptr<agent::GatewayBackend> gateway;
    if (config.use_gateway) {
        gateway = std::make_unique<agent::GatewayBackend>(agent::GatewayBackend::from_env());
    } else {
        if (config.script_path.empty())
            throw std::runtime_error("scripted backend needs --script (or use the gateway)");
        scripted = agent::ScriptedBackend::from_file(config.script_path);
        if (config.parallelism > 1 && !scripted->keyed())
            throw std::runtime_error(
                "parallel runs need a keyed script (entries with sample_id/version)");
    }

    struct Task {
        std::size_t sample_index;
        eval::Label version;
        std::unique_ptr<agent::ModelBackend> own_backend; // keyed scripted mode
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (eval::Label v : {eval::Label::vul, eval::Label::ben}) {
            Task t{i, v, nullptr};
            if (scripted && scripted->keyed())
                t.own_backend =
                    scripted->view_for(samples[i].sample_id, v == eval::Label::vul ? "vul" : "ben");
            tasks.push_back(std::move(t));
        }
    }

    struct Slot {
        bool aborted = false;
        eval::PredictionRecord record;
        AbortEntry abort;
        std::string transcript_text;
    };
    std::vector<Slot> slots(tasks.size());

    GraphCache cache;
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            Task& task = tasks[i];
            const history::PairwiseSample& s = samples[task.sample_index];
            bool is_vul = task.version == eval::Label::vul;
            Slot& slot = slots[i];
            slot.abort = {s.sample_id, is_vul ? "vul" : "ben", ""};

            std::shared_ptr<const graph::CallGraph> g;
            try {
                g = cache.get(is_vul ? s.r_intro : s.r_fix);
            } catch (const std::exception& e) {
                slot.aborted = true;
                slot.abort.reason = std::string("snapshot load failed: ") + e.what();
                continue;
            }
            const graph::FunctionDef* target = find_target(*g, s.file, s.function_name);
            if (!target) {
                slot.aborted = true;
                slot.abort.reason = "target function not found in snapshot";
                continue;
            }

            agent::ModelBackend& backend =
                task.own_backend ? *task.own_backend
                                 : (scripted ? static_cast<agent::ModelBackend&>(*scripted)
                                             : static_cast<agent::ModelBackend&>(*gateway));
            agent::DetectorResult res = run_detector(config, backend, prompts, *g, *target);
            slot.transcript_text = res.transcript.render();
            if (res.transcript.aborted) {
                slot.aborted = true;
                slot.abort.reason = res.transcript.abort_reason;
                continue;
            }

            eval::PredictionRecord rec;
            rec.sample_id = s.sample_id;
            rec.version = task.version;
            rec.truth = task.version; // each side's ground truth is its version
            rec.predicted = res.verdict.label == agent::Verdict::Label::vul ? eval::Label::vul
                                                                            : eval::Label::ben;
            rec.predicted_cwe = res.verdict.cwe;
            rec.truth_cwe = s.cwe_id;
            rec.tool_invocations = res.transcript.tool_invocations;
            rec.fallback_flag = res.transcript.fallback;
            slot.record = std::move(rec);
        }
    };

    std::size_t n_threads = std::min<std::size_t>(config.parallelism, tasks.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // persistence in task order keeps reruns byte-identical
    fs::create_directories(fs::path(config.output_dir) / "transcripts");
    std::ofstream records_out(fs::path(config.output_dir) / "records.jsonl", std::ios::binary);
    std::ofstream aborts_out(fs::path(config.output_dir) / "aborts.jsonl", std::ios::binary);

    RunArtifact artifact;
    artifact.output_dir = config.output_dir;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const Slot& slot = slots[i];
        const std::string& version = slot.abort.version;
        if (!slot.transcript_text.empty()) {
            std::ofstream t(fs::path(config.output_dir) / "transcripts" /
                                (slot.abort.sample_id + "." + version + ".txt"),
                            std::ios::binary);
            t << slot.transcript_text;
        }
        if (slot.aborted) {
            aborts_out << json{{"sample_id", slot.abort.sample_id},
                               {"version", version},
                               {"reason", slot.abort.reason}}
                              .dump()
                       << '\n';
            artifact.aborts.push_back(slot.abort);
        } else {
            records_out << record_to_json(slot.record).dump() << '\n';
            artifact.records.push_back(slot.record);
        }
    }

    if (artifact.records.size() + artifact.aborts.size() != 2 * samples.size())
        throw std::logic_error("record conservation violated");

    json manifest = {{"config_hash", config_hash(config)},
                     {"toolkit_version", std::string(toolkit_version())},
                     {"detector", std::string(detector_name(config.detector))},
                     {"strategy", config.strategy.name()},
                     {"samples", samples.size()},
                     {"records", artifact.records.size()},
                     {"aborts", artifact.aborts.size()}};
    std::ofstream manifest_out(fs::path(config.output_dir) / "run_manifest.json",
                               std::ios::binary);
    manifest_out << manifest.dump(2) << '\n';

    return artifact;
}

eval::MetricsReport evaluate_run(const std::string& run_dir) {
    fs::path dir(run_dir);
    std::ifstream in(dir / "records.jsonl");
    if (!in) throw std::runtime_error("no records.jsonl in " + run_dir);

    std::vector<eval::PredictionRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json doc = json::parse(line);
        eval::PredictionRecord r;
        r.sample_id = doc.at("sample_id").get<std::string>();
        r.version = label_from(doc.at("version").get<std::string>());
        r.truth = label_from(doc.at("truth").get<std::string>());
        r.predicted = label_from(doc.at("predicted").get<std::string>());
        if (!doc.at("predicted_cwe").is_null())
            r.predicted_cwe = doc.at("predicted_cwe").get<std::string>();
        r.truth_cwe = doc.at("truth_cwe").get<std::string>();
        r.tool_invocations = doc.at("tool_invocations").get<int>();
        r.fallback_flag = doc.at("fallback").get<bool>();
        records.push_back(std::move(r));
    }

    std::optional<eval::ScanResult> scan;
    if (fs::exists(dir / "scan_result.json")) {
        std::ifstream scan_in(dir / "scan_result.json");
        json doc = json::parse(scan_in);
        eval::ScanResult s;
        s.detected_known = doc.at("detected_known").get<long long>();
        s.total_known = doc.at("total_known").get<long long>();
        s.marked = doc.at("marked").get<long long>();
        s.total_functions = doc.at("total_functions").get<long long>();
        scan = s;
    }

    std::string method_label;
    if (fs::exists(dir / "run_manifest.json")) {
        std::ifstream man_in(dir / "run_manifest.json");
        json doc = json::parse(man_in);
        method_label = doc.value("detector", "") + "+" + doc.value("strategy", "");
    }

    return eval::build_report(records, scan, method_label);
}

std::vector<KnownVulnerability> read_known_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read known list: " + path);
    std::vector<KnownVulnerability> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json doc = json::parse(line);
        out.push_back({doc.at("file").get<std::string>(),
                       doc.at("function_name").get<std::string>()});
    }
    return out;
}

eval::ScanResult scan_snapshot(const graph::CallGraph& g,
                               const std::vector<KnownVulnerability>& known,
                               const RunConfig& config) {
    auto prompts = agent::PromptLibrary::load(config.templates_dir);

    std::unique_ptr<agent::ModelBackend> backend;
    if (config.use_gateway)
        backend = std::make_unique<agent::GatewayBackend>(agent::GatewayBackend::from_env());
    else
        backend = agent::ScriptedBackend::from_file(config.script_path);

    eval::ScanResult scan;
    scan.total_known = static_cast<long long>(known.size());
    scan.total_functions = static_cast<long long>(g.functions().size());

    for (const auto& f : g.functions()) {
        agent::DetectorResult res = run_detector(config, *backend, prompts, g, f);
        if (res.transcript.aborted) continue;
        if (res.verdict.label != agent::Verdict::Label::vul) continue;
        ++scan.marked;
        bool is_known = std::any_of(known.begin(), known.end(), [&](const KnownVulnerability& k) {
            return k.file == f.file && k.function_name == f.name;
        });
        if (is_known) ++scan.detected_known;
    }
    return scan;
}

void write_scan_result(const std::string& run_dir, const eval::ScanResult& scan) {
    fs::create_directories(run_dir);
    json doc = {{"detected_known", scan.detected_known},
                {"total_known", scan.total_known},
                {"marked", scan.marked},
                {"total_functions", scan.total_functions}};
    std::ofstream out(fs::path(run_dir) / "scan_result.json", std::ios::binary);
    out << doc.dump(2) << '\n';
}

} // namespace jitscan::harness
