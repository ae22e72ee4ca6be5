// SPDX-License-Identifier: Apache-2.0
#include "jitscan/evaluation.hpp"

#include <json.hpp>

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace jitscan::eval {

namespace {
using json = nlohmann::ordered_json;
}

std::string_view outcome_name(PairOutcome o) {
    switch (o) {
    case PairOutcome::correct: return "correct";
    case PairOutcome::pairwise_vulnerable: return "pairwise_vulnerable";
    case PairOutcome::pairwise_benign: return "pairwise_benign";
    case PairOutcome::pairwise_reversed: return "pairwise_reversed";
    }
    return "unknown";
}

Rate f1(long long tp, long long fp, long long fn) {
    long long denom = 2 * tp + fp + fn;
    if (denom == 0) return {0.0, true};
    return {2.0 * static_cast<double>(tp) / static_cast<double>(denom), false};
}

Rate precision(long long tp, long long fp) {
    if (tp + fp == 0) return {0.0, true};
    return {static_cast<double>(tp) / static_cast<double>(tp + fp), false};
}

Rate recall(long long tp, long long fn) {
    if (tp + fn == 0) return {0.0, true};
    return {static_cast<double>(tp) / static_cast<double>(tp + fn), false};
}

PairOutcome classify_pair(Label pred_on_vul, Label pred_on_ben) {
    if (pred_on_vul == Label::vul && pred_on_ben == Label::ben) return PairOutcome::correct;
    if (pred_on_vul == Label::vul && pred_on_ben == Label::vul)
        return PairOutcome::pairwise_vulnerable;
    if (pred_on_vul == Label::ben && pred_on_ben == Label::ben)
        return PairOutcome::pairwise_benign;
    return PairOutcome::pairwise_reversed;
}

double pacc(const std::vector<PairOutcome>& outcomes) {
    if (outcomes.empty()) throw EmptyInput("pacc over zero pairs");
    auto correct = std::count(outcomes.begin(), outcomes.end(), PairOutcome::correct);
    return static_cast<double>(correct) / static_cast<double>(outcomes.size());
}

DetectionMetrics compute_detection_metrics(const ScanResult& scan) {
    if (scan.total_known < 1) throw ZeroDenominator("scan has no known vulnerabilities");
    if (scan.total_functions < 1) throw ZeroDenominator("scan covered no functions");

    DetectionMetrics m;
    m.vdr = static_cast<double>(scan.detected_known) / static_cast<double>(scan.total_known);
    m.mfr = static_cast<double>(scan.marked) / static_cast<double>(scan.total_functions);
    m.dpi = 2.0 / (1.0 / (m.vdr + 1.0) + 1.0 / (m.mfr + 1.0));
    m.dpi_alt = 2.0 / (1.0 / (m.vdr + 1.0) + 1.0 / ((1.0 - m.mfr) + 1.0));
    return m;
}

Rate cla(const std::vector<PredictionRecord>& records) {
    long long detected = 0, matched = 0;
    for (const auto& r : records) {
        if (r.truth != Label::vul || r.predicted != Label::vul) continue;
        ++detected;
        if (r.predicted_cwe && *r.predicted_cwe == r.truth_cwe) ++matched;
    }
    if (detected == 0) return {0.0, true};
    return {static_cast<double>(matched) / static_cast<double>(detected), false};
}

double tir(const std::vector<PredictionRecord>& records) {
    if (records.empty()) throw EmptyInput("tir over zero records");
    long long total = 0;
    for (const auto& r : records) total += r.tool_invocations;
    return static_cast<double>(total) / static_cast<double>(records.size());
}

std::map<int, long long> tool_histogram(const std::vector<PredictionRecord>& records) {
    std::map<int, long long> hist;
    for (const auto& r : records) ++hist[r.tool_invocations];
    return hist;
}

MetricsReport build_report(const std::vector<PredictionRecord>& records,
                           const std::optional<ScanResult>& scan, std::string method_label) {
    MetricsReport rep;
    rep.method_label = std::move(method_label);

    for (const auto& r : records) {
        bool pred_vul = r.predicted == Label::vul;
        bool truth_vul = r.truth == Label::vul;
        if (pred_vul && truth_vul) ++rep.tp;
        else if (pred_vul && !truth_vul) ++rep.fp;
        else if (!pred_vul && truth_vul) ++rep.fn;
        else ++rep.tn;
    }
    rep.f1_score = f1(rep.tp, rep.fp, rep.fn);
    rep.precision_score = precision(rep.tp, rep.fp);
    rep.recall_score = recall(rep.tp, rep.fn);

    // pair by sample_id; first record per (sample, version) wins
    std::map<std::string, std::pair<const PredictionRecord*, const PredictionRecord*>> by_sample;
    for (const auto& r : records) {
        auto& slot = by_sample[r.sample_id];
        if (r.version == Label::vul) {
            if (!slot.first) slot.first = &r;
        } else {
            if (!slot.second) slot.second = &r;
        }
    }
    std::vector<PairOutcome> outcomes;
    for (const auto& [id, slot] : by_sample) {
        if (!slot.first || !slot.second) {
            ++rep.unpaired;
            continue;
        }
        outcomes.push_back(classify_pair(slot.first->predicted, slot.second->predicted));
    }
    rep.pairs = static_cast<long long>(outcomes.size());
    for (PairOutcome o : {PairOutcome::correct, PairOutcome::pairwise_vulnerable,
                          PairOutcome::pairwise_benign, PairOutcome::pairwise_reversed})
        rep.outcome_counts[std::string(outcome_name(o))] =
            std::count(outcomes.begin(), outcomes.end(), o);
    if (!outcomes.empty()) {
        rep.pacc_score = pacc(outcomes);
        rep.pacc_defined = true;
    }

    if (scan) {
        rep.detection = compute_detection_metrics(*scan);
        rep.scan_present = true;
    }

    rep.cla_score = cla(records);
    if (!records.empty()) {
        rep.tir_score = tir(records);
        rep.tir_defined = true;
    }
    long long vul_total = 0, vul_n = 0, ben_total = 0, ben_n = 0;
    for (const auto& r : records) {
        if (r.version == Label::vul) {
            vul_total += r.tool_invocations;
            ++vul_n;
        } else {
            ben_total += r.tool_invocations;
            ++ben_n;
        }
    }
    rep.mean_invocations_vul =
        vul_n ? static_cast<double>(vul_total) / static_cast<double>(vul_n) : 0.0;
    rep.mean_invocations_ben =
        ben_n ? static_cast<double>(ben_total) / static_cast<double>(ben_n) : 0.0;
    rep.histogram = tool_histogram(records);
    return rep;
}

std::string MetricsReport::to_json(int indent) const {
    json doc;
    doc["method"] = method_label;
    doc["counts"] = {{"tp", tp}, {"fp", fp}, {"fn", fn}, {"tn", tn}};
    doc["f1"] = f1_score.value;
    doc["f1_degenerate"] = f1_score.degenerate;
    doc["precision"] = precision_score.value;
    doc["precision_degenerate"] = precision_score.degenerate;
    doc["recall"] = recall_score.value;
    doc["recall_degenerate"] = recall_score.degenerate;
    doc["pairs"] = pairs;
    doc["unpaired"] = unpaired;
    doc["outcome_counts"] = outcome_counts;
    doc["pacc"] = pacc_score;
    doc["pacc_defined"] = pacc_defined;
    doc["scan_present"] = scan_present;
    doc["vdr"] = detection.vdr;
    doc["mfr"] = detection.mfr;
    doc["dpi"] = detection.dpi;
    doc["dpi_alt"] = detection.dpi_alt;
    doc["cla"] = cla_score.value;
    doc["cla_degenerate"] = cla_score.degenerate;
    doc["tir"] = tir_score;
    doc["tir_defined"] = tir_defined;
    doc["mean_invocations_vul"] = mean_invocations_vul;
    doc["mean_invocations_ben"] = mean_invocations_ben;
    json hist = json::object();
    for (const auto& [k, v] : histogram) hist[std::to_string(k)] = v;
    doc["tool_histogram"] = hist;
    return doc.dump(indent);
}

namespace {

std::string fmt(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4) << v;
    return out.str();
}

void row(std::ostringstream& out, std::string_view name, const std::string& value,
         bool starred = false) {
    out << std::left << std::setw(26) << name << std::right << std::setw(10)
        << (value + (starred ? "*" : " ")) << '\n';
}

} // namespace

std::string MetricsReport::to_table() const {
    std::ostringstream out;
    std::string method = method_label.empty() ? "(run)" : method_label;
    out << std::left << std::setw(26) << "method" << std::right << std::setw(10) << "F1"
        << std::setw(10) << "pAcc" << '\n';
    out << std::string(46, '-') << '\n';
    out << std::left << std::setw(26) << method << std::right << std::setw(10)
        << fmt(f1_score.value) << std::setw(10) << (pacc_defined ? fmt(pacc_score) : "-")
        << "\n\n";

    out << std::left << std::setw(26) << "metric" << std::right << std::setw(10) << "value"
        << '\n';
    out << std::string(36, '-') << '\n';
    row(out, "precision", fmt(precision_score.value), precision_score.degenerate);
    row(out, "recall", fmt(recall_score.value), recall_score.degenerate);
    row(out, "pairs", std::to_string(pairs));
    row(out, "unpaired", std::to_string(unpaired));
    for (const auto& [name, count] : outcome_counts) row(out, name, std::to_string(count));
    row(out, "vdr", scan_present ? fmt(detection.vdr) : "0.0000", !scan_present);
    row(out, "mfr", scan_present ? fmt(detection.mfr) : "0.0000", !scan_present);
    row(out, "dpi", scan_present ? fmt(detection.dpi) : "0.0000", !scan_present);
    row(out, "dpi_alt", scan_present ? fmt(detection.dpi_alt) : "0.0000", !scan_present);
    row(out, "cla", fmt(cla_score.value), cla_score.degenerate);
    row(out, "tir", fmt(tir_score), !tir_defined);
    row(out, "mean_invocations_vul", fmt(mean_invocations_vul));
    row(out, "mean_invocations_ben", fmt(mean_invocations_ben));
    out << "\n* degenerate or absent denominator; value reported as 0\n";
    return out.str();
}

std::string MetricsReport::histogram_csv() const {
    std::ostringstream out;
    out << "invocations,count\n";
    for (const auto& [k, v] : histogram) out << k << ',' << v << '\n';
    return out.str();
}

} // namespace jitscan::eval
