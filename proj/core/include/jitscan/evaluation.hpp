// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace jitscan::eval {

enum class Label { vul, ben };

/// One detector prediction joined with ground truth. `version` names which
/// side of the pair was analyzed; by construction truth equals version.
struct PredictionRecord {
    std::string sample_id;
    Label version = Label::vul;
    Label truth = Label::vul;
    Label predicted = Label::ben;
    std::optional<std::string> predicted_cwe;
    std::string truth_cwe;
    int tool_invocations = 0;
    bool fallback_flag = false;
};

enum class PairOutcome { correct, pairwise_vulnerable, pairwise_benign, pairwise_reversed };

std::string_view outcome_name(PairOutcome o);

struct EmptyInput : std::runtime_error {
    explicit EmptyInput(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroDenominator : std::runtime_error {
    explicit ZeroDenominator(const std::string& what) : std::runtime_error(what) {}
};

/// A rate whose denominator may be empty; degenerate rates render as 0.0
/// with the flag set instead of failing mid-report.
struct Rate {
    double value = 0.0;
    bool degenerate = false;
};

Rate f1(long long tp, long long fp, long long fn);
Rate precision(long long tp, long long fp);
Rate recall(long long tp, long long fn);

PairOutcome classify_pair(Label pred_on_vul, Label pred_on_ben);

/// Fraction of pairs classified correct. Throws EmptyInput on no pairs.
double pacc(const std::vector<PairOutcome>& outcomes);

/// Counters of one whole-repository scan.
struct ScanResult {
    long long detected_known = 0;
    long long total_known = 0;
    long long marked = 0;
    long long total_functions = 0;
};

struct DetectionMetrics {
    double vdr = 0.0;
    double mfr = 0.0;
    double dpi = 0.0;     // 2 / (1/(vdr+1) + 1/(mfr+1)), implemented as written
    double dpi_alt = 0.0; // non-standard variant using (1 - mfr); lower mfr is better
};

/// Throws ZeroDenominator unless total_known >= 1 and total_functions >= 1.
DetectionMetrics compute_detection_metrics(const ScanResult& scan);

/// Among records with truth=vul and predicted=vul, the fraction whose
/// predicted CWE exactly equals the true CWE. No detections -> degenerate.
Rate cla(const std::vector<PredictionRecord>& records);

/// Mean tool invocations per record. Throws EmptyInput on no records.
double tir(const std::vector<PredictionRecord>& records);

std::map<int, long long> tool_histogram(const std::vector<PredictionRecord>& records);

struct MetricsReport {
    std::string method_label;

    long long tp = 0, fp = 0, fn = 0, tn = 0;
    Rate f1_score;
    Rate precision_score;
    Rate recall_score;

    long long pairs = 0;
    long long unpaired = 0;
    std::map<std::string, long long> outcome_counts;
    double pacc_score = 0.0;
    bool pacc_defined = false;

    bool scan_present = false;
    DetectionMetrics detection;

    Rate cla_score;
    double tir_score = 0.0;
    bool tir_defined = false;
    double mean_invocations_vul = 0.0;
    double mean_invocations_ben = 0.0;
    std::map<int, long long> histogram;

    std::string to_json(int indent = 2) const;
    std::string to_table() const;
    std::string histogram_csv() const;
};

/// Aggregate records (and an optional scan result) into the full report.
MetricsReport build_report(const std::vector<PredictionRecord>& records,
                           const std::optional<ScanResult>& scan = std::nullopt,
                           std::string method_label = {});

} // namespace jitscan::eval
