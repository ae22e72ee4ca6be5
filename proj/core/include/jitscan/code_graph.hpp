// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace jitscan::graph {

enum class LanguageHint { c_like };

/// One file of a repository snapshot. `text` holds the on-disk bytes
/// decoded as UTF-8 with lossy replacement; `path` is repo-relative and
/// unique within the snapshot.
struct SourceFile {
    std::string path;
    std::string text;
    LanguageHint language_hint = LanguageHint::c_like;
};

/// A top-level function definition found by the lexical extractor.
/// `body` is the verbatim slice of whole source lines
/// [start_line, end_line], signature and braces included.
struct FunctionDef {
    std::string name;
    std::string file;
    int start_line = 0; // 1-based inclusive
    int end_line = 0;
    std::string body;
};

/// A call site inside a function body. `resolved` is true when the callee
/// name has at least one definition in the snapshot.
struct CallSite {
    std::string caller_file;
    std::string caller_name;
    int caller_start_line = 0;
    std::string callee_name;
    int line = 0;
    bool resolved = false;
};

struct GraphDiagnostic {
    std::string file;
    int line = 0;
    std::string message;
};

struct UnbalancedBracesError : std::runtime_error {
    UnbalancedBracesError(std::string file_, int line_)
        : std::runtime_error("unbalanced braces in " + file_ + " at line " + std::to_string(line_)),
          file(std::move(file_)), line(line_) {}
    std::string file;
    int line;
};

struct CallerEntry {
    std::string name; // caller function name
    int line = 0;     // call-site line
};

struct CalleeEntry {
    std::string name; // callee name, possibly external
    int line = 0;
    bool resolved = false;
};

/// Result of a by-name definition lookup. On ambiguity `def` points at the
/// lexicographically smallest (file, start_line) candidate so tool callers
/// can proceed with a disambiguation note instead of stalling.
struct DefinitionQuery {
    enum class Status { found, not_found, ambiguous };
    Status status = Status::not_found;
    const FunctionDef* def = nullptr;
    std::vector<const FunctionDef*> candidates;
};

/// Extract every top-level function definition: an identifier followed by a
/// parenthesized parameter list followed by a balanced brace block, at file
/// scope. Comments, string literals, and preprocessor lines never produce
/// functions. Ordered by start_line.
/// Throws UnbalancedBracesError when a brace block never closes.
std::vector<FunctionDef> extract_functions(const SourceFile& source);

/// Immutable caller/callee graph over one repository snapshot.
class CallGraph {
public:
    const std::string& snapshot_id() const { return snapshot_id_; }
    const std::vector<FunctionDef>& functions() const { return functions_; }
    const std::vector<CallSite>& edges() const { return edges_; }
    const std::vector<GraphDiagnostic>& diagnostics() const { return diagnostics_; }

    /// Call sites whose callee is `function_name`, as (caller name, line),
    /// sorted by (caller file, line). Unknown names yield an empty list.
    std::vector<CallerEntry> get_callers(std::string_view function_name) const;

    /// Callees of the definition selected by (function_name, line), sorted by
    /// line; includes unresolved external names. With no line and several
    /// same-named definitions, the lexicographically smallest is used and
    /// `ambiguous` (when supplied) is set.
    std::vector<CalleeEntry> get_callees(std::string_view function_name,
                                         std::optional<int> line = std::nullopt,
                                         bool* ambiguous = nullptr) const;

    DefinitionQuery get_definition(std::string_view function_name,
                                   std::optional<int> line = std::nullopt) const;

    /// Callees of one exact definition.
    std::vector<CalleeEntry> callees_of(const FunctionDef& def) const;

    bool has_definition(std::string_view name) const;

    /// Canonical JSON document; bodies are not serialized.
    std::string to_json(int indent = 2) const;

    friend CallGraph build_graph(std::vector<SourceFile> snapshot, std::string snapshot_id);
    friend CallGraph load_graph(const std::string& json_text,
                                const std::vector<SourceFile>& snapshot);

private:
    std::string snapshot_id_;
    std::vector<FunctionDef> functions_;
    std::vector<CallSite> edges_;
    std::map<std::string, std::vector<std::size_t>, std::less<>> name_index_;
    std::vector<GraphDiagnostic> diagnostics_;

    void rebuild_name_index();
};

/// Extract all files and collect call sites. Per-file extraction failures
/// are recorded as diagnostics, never fatal. Files are processed in
/// path-sorted order so the serialized graph is byte-stable.
CallGraph build_graph(std::vector<SourceFile> snapshot, std::string snapshot_id);

/// Rebuild a graph from its JSON document, re-slicing function bodies from
/// the snapshot text.
CallGraph load_graph(const std::string& json_text, const std::vector<SourceFile>& snapshot);

/// True for the extensions the extractor understands:
/// .c .h .cc .cpp .cxx .hpp .hh (case-insensitive).
bool is_c_like_path(std::string_view path);

/// Read every c-like source file under `dir`, recursively, decoding
/// lossily. Paths are dir-relative and sorted.
std::vector<SourceFile> load_snapshot_dir(const std::string& dir);

} // namespace jitscan::graph
