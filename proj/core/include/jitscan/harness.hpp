// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "jitscan/agent.hpp"
#include "jitscan/evaluation.hpp"
#include "jitscan/history.hpp"

#include <optional>
#include <string>
#include <vector>

namespace jitscan::harness {

struct RunConfig {
    agent::DetectorKind detector = agent::DetectorKind::plain;
    agent::Strategy strategy;
    std::string script_path; // scripted backend JSONL; empty selects the gateway
    bool use_gateway = false;
    int max_iterations = 10;
    int k = 5;
    retrieval::PoolMode pool_mode = retrieval::PoolMode::shared;
    int parallelism = 1;
    std::string output_dir;
    std::string templates_dir = "templates";
    double temperature = 0.0;
};

/// FNV-1a hash of the canonical config serialization, as hex text.
std::string config_hash(const RunConfig& config);

std::string_view toolkit_version();

struct AbortEntry {
    std::string sample_id;
    std::string version; // "vul" | "ben"
    std::string reason;
};

/// Everything one benchmark run persists under config.output_dir:
/// records.jsonl, aborts.jsonl, transcripts/<sample>.<version>.txt and
/// run_manifest.json. Records and aborts satisfy
/// records + aborts = 2 x samples.
struct RunArtifact {
    std::string output_dir;
    std::vector<eval::PredictionRecord> records;
    std::vector<AbortEntry> aborts;
};

/// Run the configured detector on both versions of every sample. Snapshot
/// graphs are cached by content hash; per-sample failures become abort
/// entries, never run failures. Rerunning an identical config over an
/// identical script yields byte-identical records.jsonl.
RunArtifact run_benchmark(const std::vector<history::PairwiseSample>& samples,
                          const RunConfig& config);

/// Re-read a persisted run and aggregate its metrics. Detection (vdr, mfr,
/// dpi) is degenerate unless scan_result.json is present in the run dir.
eval::MetricsReport evaluate_run(const std::string& run_dir);

struct KnownVulnerability {
    std::string file;
    std::string function_name;
};

/// JSONL of {"file", "function_name"} lines.
std::vector<KnownVulnerability> read_known_list(const std::string& path);

/// Run the detector over every function in the snapshot, counting marked
/// functions and detected known vulnerabilities. Sequential.
eval::ScanResult scan_snapshot(const graph::CallGraph& g,
                               const std::vector<KnownVulnerability>& known,
                               const RunConfig& config);

void write_scan_result(const std::string& run_dir, const eval::ScanResult& scan);

} // namespace jitscan::harness
