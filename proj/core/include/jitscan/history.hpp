// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "jitscan/code_graph.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jitscan::history {

/// One commit of a linear (first-parent) history.
struct CommitRef {
    std::string id;
    std::optional<std::string> parent;
    std::string snapshot_ref; // locator of the full repository state
    std::string message;
};

/// Ancestor chain ordered child-before-parent; chain[0] is the head.
struct HistoryView {
    std::vector<CommitRef> chain;
};

/// Read access to commit snapshots. Implementations: a directory-per-commit
/// layout for fixtures and a git adapter for real repositories.
class SnapshotProvider {
public:
    virtual ~SnapshotProvider() = default;

    virtual std::optional<CommitRef> find_commit(std::string_view id) const = 0;

    /// Chain from `head_id` back to the root. Empty chain when unknown.
    virtual HistoryView history_from(std::string_view head_id) const = 0;

    virtual std::vector<graph::SourceFile> load_snapshot(const CommitRef& commit) const = 0;

    /// One file's text at a commit; nullopt when absent.
    virtual std::optional<std::string> read_file(const CommitRef& commit,
                                                 std::string_view path) const = 0;
};

/// Layout: `<root>/chain.json` is an array ordered head to root, each element
/// {"id", "dir", "message"?} with `dir` naming the snapshot directory under
/// root. The parent of element i is element i+1.
class DirectoryHistoryProvider : public SnapshotProvider {
public:
    explicit DirectoryHistoryProvider(std::string root_dir);

    std::optional<CommitRef> find_commit(std::string_view id) const override;
    HistoryView history_from(std::string_view head_id) const override;
    std::vector<graph::SourceFile> load_snapshot(const CommitRef& commit) const override;
    std::optional<std::string> read_file(const CommitRef& commit,
                                         std::string_view path) const override;

    const std::vector<CommitRef>& chain() const { return chain_; }

private:
    std::string root_;
    std::vector<CommitRef> chain_; // head first
};

/// Adapter over a local git repository, first-parent order. Snapshot
/// locators are `<repo>@<commit>` and are not directory paths; use
/// load_snapshot/read_file rather than resolving them.
class GitSnapshotProvider : public SnapshotProvider {
public:
    explicit GitSnapshotProvider(std::string repo_dir);

    std::optional<CommitRef> find_commit(std::string_view id) const override;
    HistoryView history_from(std::string_view head_id) const override;
    std::vector<graph::SourceFile> load_snapshot(const CommitRef& commit) const override;
    std::optional<std::string> read_file(const CommitRef& commit,
                                         std::string_view path) const override;

private:
    std::string repo_;
};

/// Canonical form for cross-commit body comparison: comments dropped,
/// whitespace runs outside string/char literals collapsed to one space,
/// ends trimmed. Idempotent. String literal contents are kept verbatim.
std::string normalize_body(std::string_view body);

/// Verbatim body plus its normalized form.
struct BodyPair {
    std::string verbatim;
    std::string normalized;
};

struct PairwiseSample {
    std::string sample_id;
    std::string cve_id;
    std::string cwe_id; // e.g. "CWE-918"
    std::string file;
    std::string function_name;
    BodyPair f_vul;
    BodyPair f_ben;
    CommitRef vul_intro;
    CommitRef vul_fix;
    std::string r_intro;
    std::string r_fix;
    bool root_introduction = false; // vul_intro is the history root
};

/// Outcome of the sole-modified-function comparison between two snapshots.
/// Functions present on only one side are not counted as changed.
struct LocateResult {
    enum class Status { found, no_function_changed, multiple_functions_changed };
    Status status = Status::no_function_changed;
    std::string file;
    std::string function_name;
    // every (file, name) whose normalized body differs, sorted
    std::vector<std::pair<std::string, std::string>> changed;
};

LocateResult locate_modified_function(const std::vector<graph::SourceFile>& before,
                                      const std::vector<graph::SourceFile>& after);

/// Result of the backward walk to the vulnerability-introducing commit.
/// root_introduction still carries the root commit: the body was already
/// present in the oldest reachable state.
struct TraceResult {
    enum class Status { found, root_introduction, target_missing_at_head };
    Status status = Status::target_missing_at_head;
    CommitRef commit;
    std::string detail;
};

/// Walk `history` (which must start at the fix commit's parent) child to
/// parent and return the most recent commit whose normalized target body
/// equals `f_vul_normalized` while the parent's differs or is absent.
TraceResult trace_vul_intro(const SnapshotProvider& provider, const HistoryView& history,
                            std::string_view file, std::string_view function_name,
                            std::string_view f_vul_normalized);

struct ManifestEntry {
    std::string cve_id;
    std::string cwe_id;
    std::string repo; // history root for the directory provider
    std::string vul_fix_commit;
    std::optional<std::string> file_hint;
};

/// Accepted sample or exactly one rejection reason.
struct SampleResult {
    bool accepted = false;
    PairwiseSample sample;
    std::string reject_reason;
};

SampleResult build_pairwise_sample(const ManifestEntry& entry, const SnapshotProvider& provider);

std::vector<ManifestEntry> read_manifest(const std::string& path);

/// Persist samples under `dir`: samples.jsonl plus `<sample_id>.vul.c` /
/// `<sample_id>.ben.c` sidecars with the verbatim bodies, and
/// rejections.jsonl with one {"cve_id", "reason"} line per rejected entry.
void write_samples(const std::string& dir, const std::vector<SampleResult>& results);

std::vector<PairwiseSample> load_samples(const std::string& dir);

} // namespace jitscan::history
