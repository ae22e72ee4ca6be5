// SPDX-License-Identifier: Apache-2.0
#include "jitscan/code_graph.hpp"

#include "jitscan/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace jitscan::graph {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Fixed exclusion list; `do` and `else` are never followed by `(` in valid
// code but belong to the documented set.
constexpr std::array<std::string_view, 8> kKeywords = {
    "if", "for", "while", "switch", "return", "sizeof", "do", "else"};

bool is_keyword(std::string_view token) {
    return std::find(kKeywords.begin(), kKeywords.end(), token) != kKeywords.end();
}

std::size_t skip_ws(std::string_view s, std::size_t i) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r')) ++i;
    return i;
}

// A function definition candidate located in the masked text.
struct Extent {
    std::string name;
    std::size_t sig_begin;   // first char of the signature
    std::size_t body_open;   // '{'
    std::size_t body_close;  // matching '}'
};

// Scan masked file-scope text for `identifier ( params ) {`. Throws
// UnbalancedBracesError when a block never closes.
std::vector<Extent> scan_extents(std::string_view masked, const std::string& path) {
    std::vector<Extent> out;
    int depth = 0;
    std::size_t i = 0;

    while (i < masked.size()) {
        char c = masked[i];
        if (c == '{') {
            ++depth;
            ++i;
            continue;
        }
        if (c == '}') {
            if (depth > 0) --depth;
            ++i;
            continue;
        }
        if (c != '(' || depth != 0) {
            ++i;
            continue;
        }

        // identifier immediately before the '(' (whitespace allowed)
        std::size_t e = i;
        while (e > 0 && (masked[e - 1] == ' ' || masked[e - 1] == '\t' ||
                         masked[e - 1] == '\n' || masked[e - 1] == '\r'))
            --e;
        std::size_t b = e;
        while (b > 0 && text::is_identifier_char(masked[b - 1])) --b;
        if (b == e || !text::is_identifier_start(masked[b])) {
            ++i;
            continue;
        }
        std::string name(masked.substr(b, e - b));

        // matching ')', parameter lists may nest parens
        int pdepth = 0;
        std::size_t j = i;
        for (; j < masked.size(); ++j) {
            if (masked[j] == '(') ++pdepth;
            else if (masked[j] == ')' && --pdepth == 0) break;
        }
        if (j >= masked.size()) break; // unmatched '(' at EOF; nothing more to find

        std::size_t after = skip_ws(masked, j + 1);
        if (after >= masked.size() || masked[after] != '{' || is_keyword(name)) {
            i = j + 1;
            continue;
        }

        // matching '}' of the body
        int bdepth = 0;
        std::size_t k = after;
        for (; k < masked.size(); ++k) {
            if (masked[k] == '{') ++bdepth;
            else if (masked[k] == '}' && --bdepth == 0) break;
        }
        if (k >= masked.size())
            throw UnbalancedBracesError(path, text::line_of_offset(masked, after));

        // signature starts after the previous top-level terminator
        std::size_t sig = 0;
        for (std::size_t p = b; p > 0; --p) {
            char t = masked[p - 1];
            if (t == ';' || t == '}' || t == '{') {
                sig = p;
                break;
            }
        }
        sig = skip_ws(masked, sig);

        out.push_back({std::move(name), sig, after, k});
        i = k + 1;
    }
    return out;
}

struct ExtractedFile {
    std::vector<FunctionDef> functions;
    std::vector<std::pair<std::size_t, std::size_t>> body_spans; // (open, close) per function
};

ExtractedFile extract_with_spans(const SourceFile& source) {
    text::MaskOptions opts{.mask_strings = true, .mask_preprocessor = true};
    std::string masked = text::mask_code(source.text, opts);
    auto extents = scan_extents(masked, source.path);

    ExtractedFile out;
    for (auto& ex : extents) {
        FunctionDef def;
        def.name = ex.name;
        def.file = source.path;
        def.start_line = text::line_of_offset(source.text, ex.sig_begin);
        def.end_line = text::line_of_offset(source.text, ex.body_close);
        def.body = text::slice_lines(source.text, def.start_line, def.end_line);

        bool dup = std::any_of(out.functions.begin(), out.functions.end(), [&](const FunctionDef& f) {
            return f.name == def.name && f.start_line == def.start_line;
        });
        if (dup) continue; // (file, name, start_line) must stay unique

        out.functions.push_back(std::move(def));
        out.body_spans.emplace_back(ex.body_open, ex.body_close);
    }
    return out;
}

// Call sites inside one body span: identifier (not a keyword) followed by
// optional whitespace and '('.
std::vector<std::pair<std::string, int>> scan_calls(std::string_view masked,
                                                    std::size_t open, std::size_t close) {
    std::vector<std::pair<std::string, int>> calls;
    std::size_t i = open + 1;
    while (i < close) {
        if (!text::is_identifier_start(masked[i])) {
            ++i;
            continue;
        }
        std::size_t b = i;
        while (i < close && text::is_identifier_char(masked[i])) ++i;
        std::string tok(masked.substr(b, i - b));
        std::size_t after = skip_ws(masked, i);
        if (after < close && masked[after] == '(' && !is_keyword(tok))
            calls.emplace_back(std::move(tok), text::line_of_offset(masked, b));
    }
    return calls;
}

} // namespace

bool is_c_like_path(std::string_view path) {
    static constexpr std::array<std::string_view, 7> kExts = {".c", ".h", ".cc", ".cpp",
                                                              ".cxx", ".hpp", ".hh"};
    std::string ext = fs::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return std::find(kExts.begin(), kExts.end(), ext) != kExts.end();
}

std::vector<FunctionDef> extract_functions(const SourceFile& source) {
    return extract_with_spans(source).functions;
}

CallGraph build_graph(std::vector<SourceFile> snapshot, std::string snapshot_id) {
    std::sort(snapshot.begin(), snapshot.end(),
              [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });

    CallGraph g;
    g.snapshot_id_ = std::move(snapshot_id);

    struct PendingCalls {
        std::size_t function_index;
        std::vector<std::pair<std::string, int>> calls;
    };
    std::vector<PendingCalls> pending;

    for (const auto& file : snapshot) {
        ExtractedFile ex;
        try {
            ex = extract_with_spans(file);
        } catch (const UnbalancedBracesError& e) {
            g.diagnostics_.push_back({e.file, e.line, "unbalanced braces; file skipped"});
            continue;
        }
        text::MaskOptions opts{.mask_strings = true, .mask_preprocessor = true};
        std::string masked = text::mask_code(file.text, opts);

        for (std::size_t fi = 0; fi < ex.functions.size(); ++fi) {
            std::size_t idx = g.functions_.size();
            g.functions_.push_back(std::move(ex.functions[fi]));
            auto [open, close] = ex.body_spans[fi];
            pending.push_back({idx, scan_calls(masked, open, close)});
        }
    }

    g.rebuild_name_index();

    for (auto& pc : pending) {
        const FunctionDef& caller = g.functions_[pc.function_index];
        for (auto& [callee, line] : pc.calls) {
            CallSite site;
            site.caller_file = caller.file;
            site.caller_name = caller.name;
            site.caller_start_line = caller.start_line;
            site.callee_name = callee;
            site.line = line;
            site.resolved = g.name_index_.count(callee) > 0;
            g.edges_.push_back(std::move(site));
        }
    }
    return g;
}

void CallGraph::rebuild_name_index() {
    name_index_.clear();
    for (std::size_t i = 0; i < functions_.size(); ++i)
        name_index_[functions_[i].name].push_back(i);
    for (auto& [name, idxs] : name_index_) {
        std::sort(idxs.begin(), idxs.end(), [this](std::size_t a, std::size_t b) {
            const auto& fa = functions_[a];
            const auto& fb = functions_[b];
            return std::tie(fa.file, fa.start_line) < std::tie(fb.file, fb.start_line);
        });
    }
}

bool CallGraph::has_definition(std::string_view name) const {
    return name_index_.find(name) != name_index_.end();
}

std::vector<CallerEntry> CallGraph::get_callers(std::string_view function_name) const {
    std::vector<const CallSite*> hits;
    for (const auto& e : edges_)
        if (e.callee_name == function_name) hits.push_back(&e);
    std::stable_sort(hits.begin(), hits.end(), [](const CallSite* a, const CallSite* b) {
        return std::tie(a->caller_file, a->line) < std::tie(b->caller_file, b->line);
    });
    std::vector<CallerEntry> out;
    out.reserve(hits.size());
    for (const auto* h : hits) out.push_back({h->caller_name, h->line});
    return out;
}

DefinitionQuery CallGraph::get_definition(std::string_view function_name,
                                          std::optional<int> line) const {
    DefinitionQuery q;
    auto it = name_index_.find(function_name);
    if (it == name_index_.end()) return q;

    std::vector<const FunctionDef*> defs;
    for (std::size_t idx : it->second) defs.push_back(&functions_[idx]);

    if (line) {
        for (const auto* d : defs) {
            if (d->start_line <= *line && *line <= d->end_line) {
                q.status = DefinitionQuery::Status::found;
                q.def = d;
                return q;
            }
        }
        return q; // name exists but no definition contains the line
    }
    if (defs.size() == 1) {
        q.status = DefinitionQuery::Status::found;
        q.def = defs.front();
        return q;
    }
    q.status = DefinitionQuery::Status::ambiguous;
    q.def = defs.front(); // smallest (file, start_line); index is pre-sorted
    q.candidates = std::move(defs);
    return q;
}

std::vector<CalleeEntry> CallGraph::callees_of(const FunctionDef& def) const {
    std::vector<CalleeEntry> out;
    for (const auto& e : edges_) {
        if (e.caller_file == def.file && e.caller_name == def.name &&
            e.caller_start_line == def.start_line)
            out.push_back({e.callee_name, e.line, e.resolved});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const CalleeEntry& a, const CalleeEntry& b) { return a.line < b.line; });
    return out;
}

std::vector<CalleeEntry> CallGraph::get_callees(std::string_view function_name,
                                                std::optional<int> line, bool* ambiguous) const {
    if (ambiguous) *ambiguous = false;
    auto q = get_definition(function_name, line);
    if (q.status == DefinitionQuery::Status::not_found) return {};
    if (q.status == DefinitionQuery::Status::ambiguous && ambiguous) *ambiguous = true;
    return callees_of(*q.def);
}

std::string CallGraph::to_json(int indent) const {
    json doc;
    doc["snapshot_id"] = snapshot_id_;
    doc["functions"] = json::array();
    for (const auto& f : functions_) {
        doc["functions"].push_back({{"name", f.name},
                                    {"file", f.file},
                                    {"start_line", f.start_line},
                                    {"end_line", f.end_line}});
    }
    doc["edges"] = json::array();
    for (const auto& e : edges_) {
        doc["edges"].push_back({{"caller_file", e.caller_file},
                                {"caller_name", e.caller_name},
                                {"callee", e.callee_name},
                                {"line", e.line},
                                {"resolved", e.resolved}});
    }
    doc["diagnostics"] = json::array();
    for (const auto& d : diagnostics_)
        doc["diagnostics"].push_back({{"file", d.file}, {"line", d.line}, {"message", d.message}});
    return doc.dump(indent);
}

CallGraph load_graph(const std::string& json_text, const std::vector<SourceFile>& snapshot) {
    json doc = json::parse(json_text);

    std::map<std::string, const SourceFile*> by_path;
    for (const auto& f : snapshot) by_path[f.path] = &f;

    CallGraph g;
    g.snapshot_id_ = doc.at("snapshot_id").get<std::string>();
    for (const auto& jf : doc.at("functions")) {
        FunctionDef def;
        def.name = jf.at("name").get<std::string>();
        def.file = jf.at("file").get<std::string>();
        def.start_line = jf.at("start_line").get<int>();
        def.end_line = jf.at("end_line").get<int>();
        auto it = by_path.find(def.file);
        if (it != by_path.end())
            def.body = text::slice_lines(it->second->text, def.start_line, def.end_line);
        g.functions_.push_back(std::move(def));
    }
    g.rebuild_name_index();

    for (const auto& je : doc.at("edges")) {
        CallSite e;
        e.caller_file = je.at("caller_file").get<std::string>();
        e.caller_name = je.at("caller_name").get<std::string>();
        e.callee_name = je.at("callee").get<std::string>();
        e.line = je.at("line").get<int>();
        e.resolved = je.at("resolved").get<bool>();
        // the schema omits caller_start_line; the containing definition has it
        for (const auto& f : g.functions_) {
            if (f.file == e.caller_file && f.name == e.caller_name &&
                f.start_line <= e.line && e.line <= f.end_line) {
                e.caller_start_line = f.start_line;
                break;
            }
        }
        g.edges_.push_back(std::move(e));
    }
    if (doc.contains("diagnostics"))
        for (const auto& jd : doc.at("diagnostics"))
            g.diagnostics_.push_back({jd.at("file").get<std::string>(), jd.at("line").get<int>(),
                                      jd.at("message").get<std::string>()});
    return g;
}

std::vector<SourceFile> load_snapshot_dir(const std::string& dir) {
    std::vector<SourceFile> out;
    fs::path root(dir);
    if (!fs::exists(root)) throw std::runtime_error("snapshot directory not found: " + dir);

    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file() || !is_c_like_path(entry.path().string())) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        SourceFile f;
        f.path = entry.path().lexically_relative(root).generic_string();
        f.text = text::decode_utf8_lossy(buf.str());
        out.push_back(std::move(f));
    }
    std::sort(out.begin(), out.end(),
              [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
    return out;
}

} // namespace jitscan::graph
