// SPDX-License-Identifier: Apache-2.0
#include "jitscan/history.hpp"

#include "jitscan/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace jitscan::history {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string shell_quote(std::string_view s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    out += '\'';
    return out;
}

std::optional<std::string> run_capture(const std::string& cmd) {
    FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
    if (!pipe) return std::nullopt;
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    if (pclose(pipe) != 0) return std::nullopt;
    return out;
}

std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t nl = s.find('\n', pos);
        if (nl == std::string_view::npos) nl = s.size();
        lines.emplace_back(s.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

std::string read_text_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string sanitize_id(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_' || c == '-';
        out += ok ? c : '_';
    }
    return out;
}

/// Normalized body of (file, name) at one commit; nullopt when the file or
/// function is absent or the file does not extract.
std::optional<std::string> normalized_body_at(const SnapshotProvider& provider,
                                              const CommitRef& commit, std::string_view file,
                                              std::string_view name) {
    auto content = provider.read_file(commit, file);
    if (!content) return std::nullopt;
    graph::SourceFile sf{std::string(file), text::decode_utf8_lossy(*content)};
    std::vector<graph::FunctionDef> defs;
    try {
        defs = graph::extract_functions(sf);
    } catch (const graph::UnbalancedBracesError&) {
        return std::nullopt;
    }
    for (const auto& d : defs)
        if (d.name == name) return normalize_body(d.body);
    return std::nullopt;
}

std::optional<std::string> verbatim_body_in(const std::vector<graph::SourceFile>& snapshot,
                                            std::string_view file, std::string_view name) {
    for (const auto& sf : snapshot) {
        if (sf.path != file) continue;
        for (const auto& d : graph::extract_functions(sf))
            if (d.name == name) return d.body;
    }
    return std::nullopt;
}

} // namespace

std::string normalize_body(std::string_view body) {
    // comments become spaces, strings and preprocessor lines stay visible
    text::MaskOptions opts{.mask_strings = false, .mask_preprocessor = false};
    std::string no_comments = text::mask_code(body, opts);

    std::string out;
    out.reserve(no_comments.size());
    enum class S { code, string_lit, char_lit } state = S::code;
    bool pending_space = false;

    for (std::size_t i = 0; i < no_comments.size(); ++i) {
        char c = no_comments[i];
        if (state == S::code) {
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
                pending_space = true;
                continue;
            }
            if (pending_space) {
                if (!out.empty()) out += ' ';
                pending_space = false;
            }
            out += c;
            if (c == '"') state = S::string_lit;
            else if (c == '\'') state = S::char_lit;
        } else {
            out += c;
            if (c == '\\' && i + 1 < no_comments.size()) {
                out += no_comments[++i];
            } else if (c == '\n') {
                state = S::code; // unterminated literal; resume on the next line
            } else if ((state == S::string_lit && c == '"') ||
                       (state == S::char_lit && c == '\'')) {
                state = S::code;
            }
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

// ---------------------------------------------------------------------------
// DirectoryHistoryProvider

DirectoryHistoryProvider::DirectoryHistoryProvider(std::string root_dir)
    : root_(std::move(root_dir)) {
    fs::path chain_path = fs::path(root_) / "chain.json";
    json doc = json::parse(read_text_file(chain_path));
    if (!doc.is_array()) throw std::runtime_error("chain.json must be an array: " + root_);

    for (const auto& jc : doc) {
        CommitRef c;
        c.id = jc.at("id").get<std::string>();
        c.snapshot_ref = (fs::path(root_) / jc.at("dir").get<std::string>()).generic_string();
        if (jc.contains("message")) c.message = jc.at("message").get<std::string>();
        chain_.push_back(std::move(c));
    }
    for (std::size_t i = 0; i + 1 < chain_.size(); ++i) chain_[i].parent = chain_[i + 1].id;
}

std::optional<CommitRef> DirectoryHistoryProvider::find_commit(std::string_view id) const {
    for (const auto& c : chain_)
        if (c.id == id) return c;
    return std::nullopt;
}

HistoryView DirectoryHistoryProvider::history_from(std::string_view head_id) const {
    HistoryView hv;
    auto it = std::find_if(chain_.begin(), chain_.end(),
                           [&](const CommitRef& c) { return c.id == head_id; });
    if (it == chain_.end()) return hv;
    hv.chain.assign(it, chain_.end());
    return hv;
}

std::vector<graph::SourceFile> DirectoryHistoryProvider::load_snapshot(
    const CommitRef& commit) const {
    return graph::load_snapshot_dir(commit.snapshot_ref);
}

std::optional<std::string> DirectoryHistoryProvider::read_file(const CommitRef& commit,
                                                               std::string_view path) const {
    fs::path p = fs::path(commit.snapshot_ref) / std::string(path);
    if (!fs::exists(p) || !fs::is_regular_file(p)) return std::nullopt;
    return read_text_file(p);
}

// ---------------------------------------------------------------------------
// GitSnapshotProvider

GitSnapshotProvider::GitSnapshotProvider(std::string repo_dir) : repo_(std::move(repo_dir)) {}

std::optional<CommitRef> GitSnapshotProvider::find_commit(std::string_view id) const {
    std::string cmd = "git -C " + shell_quote(repo_) + " log -n1 --format=%H%x1f%P%x1f%s " +
                      shell_quote(id);
    auto out = run_capture(cmd);
    if (!out || out->empty()) return std::nullopt;
    auto lines = split_lines(*out);
    std::istringstream line(lines.front());
    std::string hash, parents, subject;
    std::getline(line, hash, '\x1f');
    std::getline(line, parents, '\x1f');
    std::getline(line, subject);
    CommitRef c;
    c.id = hash;
    if (!parents.empty()) c.parent = parents.substr(0, parents.find(' '));
    c.snapshot_ref = repo_ + "@" + hash;
    c.message = subject;
    return c;
}

HistoryView GitSnapshotProvider::history_from(std::string_view head_id) const {
    HistoryView hv;
    std::string cmd = "git -C " + shell_quote(repo_) +
                      " log --first-parent --format=%H%x1f%s " + shell_quote(head_id);
    auto out = run_capture(cmd);
    if (!out) return hv;
    for (const auto& l : split_lines(*out)) {
        if (l.empty()) continue;
        std::istringstream line(l);
        std::string hash, subject;
        std::getline(line, hash, '\x1f');
        std::getline(line, subject);
        CommitRef c;
        c.id = hash;
        c.snapshot_ref = repo_ + "@" + hash;
        c.message = subject;
        hv.chain.push_back(std::move(c));
    }
    for (std::size_t i = 0; i + 1 < hv.chain.size(); ++i) hv.chain[i].parent = hv.chain[i + 1].id;
    return hv;
}

std::vector<graph::SourceFile> GitSnapshotProvider::load_snapshot(const CommitRef& commit) const {
    std::vector<graph::SourceFile> files;
    std::string cmd =
        "git -C " + shell_quote(repo_) + " ls-tree -r --name-only " + shell_quote(commit.id);
    auto out = run_capture(cmd);
    if (!out) return files;
    for (const auto& path : split_lines(*out)) {
        if (path.empty() || !graph::is_c_like_path(path)) continue;
        auto content = read_file(commit, path);
        if (!content) continue;
        files.push_back({path, text::decode_utf8_lossy(*content)});
    }
    std::sort(files.begin(), files.end(),
              [](const graph::SourceFile& a, const graph::SourceFile& b) { return a.path < b.path; });
    return files;
}

std::optional<std::string> GitSnapshotProvider::read_file(const CommitRef& commit,
                                                          std::string_view path) const {
    std::string rev_path = commit.id + ":" + std::string(path);
    return run_capture("git -C " + shell_quote(repo_) + " show " + shell_quote(rev_path));
}

// ---------------------------------------------------------------------------
// pair construction

LocateResult locate_modified_function(const std::vector<graph::SourceFile>& before,
                                      const std::vector<graph::SourceFile>& after) {
    using Key = std::pair<std::string, std::string>; // (file, name)
    auto collect = [](const std::vector<graph::SourceFile>& snapshot) {
        std::map<Key, std::string> bodies;
        for (const auto& sf : snapshot)
            for (const auto& d : graph::extract_functions(sf))
                bodies.try_emplace({d.file, d.name}, normalize_body(d.body));
        return bodies;
    };
    auto bodies_before = collect(before);
    auto bodies_after = collect(after);

    LocateResult r;
    for (const auto& [key, body] : bodies_before) {
        auto it = bodies_after.find(key);
        if (it != bodies_after.end() && it->second != body) r.changed.push_back(key);
    }
    if (r.changed.size() == 1) {
        r.status = LocateResult::Status::found;
        r.file = r.changed.front().first;
        r.function_name = r.changed.front().second;
    } else if (r.changed.size() > 1) {
        r.status = LocateResult::Status::multiple_functions_changed;
    }
    return r;
}

TraceResult trace_vul_intro(const SnapshotProvider& provider, const HistoryView& history,
                            std::string_view file, std::string_view function_name,
                            std::string_view f_vul_normalized) {
    TraceResult r;
    if (history.chain.empty()) {
        r.detail = "empty history";
        return r;
    }
    auto cur = normalized_body_at(provider, history.chain.front(), file, function_name);
    if (!cur) {
        r.detail = "target function absent at history head";
        return r;
    }
    if (*cur != f_vul_normalized) {
        r.detail = "target body at history head does not match the provided body";
        return r;
    }

    for (std::size_t i = 0; i < history.chain.size(); ++i) {
        // loop invariant: body at chain[i] equals f_vul_normalized
        if (i + 1 < history.chain.size()) {
            auto parent_body =
                normalized_body_at(provider, history.chain[i + 1], file, function_name);
            if (!parent_body || *parent_body != f_vul_normalized) {
                r.status = TraceResult::Status::found;
                r.commit = history.chain[i];
                return r;
            }
        } else {
            r.status = TraceResult::Status::root_introduction;
            r.commit = history.chain[i];
            if (r.commit.parent)
                r.detail = "oldest reachable commit still carries the body; parent unavailable";
            return r;
        }
    }
    r.detail = "unreachable";
    return r;
}

SampleResult build_pairwise_sample(const ManifestEntry& entry, const SnapshotProvider& provider) {
    SampleResult result;
    result.sample.cve_id = entry.cve_id; // kept on rejection for the log
    auto reject = [&](std::string reason) {
        result.accepted = false;
        result.reject_reason = std::move(reason);
        return result;
    };

    HistoryView hv = provider.history_from(entry.vul_fix_commit);
    if (hv.chain.empty()) return reject("UnknownCommit: " + entry.vul_fix_commit);
    if (hv.chain.size() < 2) return reject("NoParent: fix commit is the history root");

    const CommitRef& fix = hv.chain[0];
    const CommitRef& fix_parent = hv.chain[1];

    auto after = provider.load_snapshot(fix);
    auto before = provider.load_snapshot(fix_parent);
    if (entry.file_hint) {
        auto keep_hinted = [&](std::vector<graph::SourceFile>& files) {
            std::erase_if(files,
                          [&](const graph::SourceFile& f) { return f.path != *entry.file_hint; });
        };
        keep_hinted(after);
        keep_hinted(before);
    }

    LocateResult loc;
    try {
        loc = locate_modified_function(before, after);
    } catch (const graph::UnbalancedBracesError& e) {
        return reject(std::string("ExtractionFailed: ") + e.what());
    }
    if (loc.status == LocateResult::Status::no_function_changed)
        return reject("NoFunctionChanged");
    if (loc.status == LocateResult::Status::multiple_functions_changed) {
        std::ostringstream msg;
        msg << "MultipleFunctionsChanged:";
        for (const auto& [file, name] : loc.changed) msg << ' ' << file << ':' << name;
        return reject(msg.str());
    }

    auto vul_body = verbatim_body_in(before, loc.file, loc.function_name);
    auto ben_body = verbatim_body_in(after, loc.file, loc.function_name);
    if (!vul_body || !ben_body) return reject("BodyExtractionFailed: " + loc.function_name);

    HistoryView sub;
    sub.chain.assign(hv.chain.begin() + 1, hv.chain.end());
    std::string f_vul_norm = normalize_body(*vul_body);
    TraceResult trace = trace_vul_intro(provider, sub, loc.file, loc.function_name, f_vul_norm);
    if (trace.status == TraceResult::Status::target_missing_at_head)
        return reject("TraceFailed: " + trace.detail);

    PairwiseSample s;
    s.sample_id = sanitize_id(entry.cve_id) + "__" + sanitize_id(loc.function_name);
    s.cve_id = entry.cve_id;
    s.cwe_id = entry.cwe_id;
    s.file = loc.file;
    s.function_name = loc.function_name;
    s.f_vul = {*vul_body, f_vul_norm};
    s.f_ben = {*ben_body, normalize_body(*ben_body)};
    s.vul_intro = trace.commit;
    s.vul_fix = fix;
    s.r_intro = trace.commit.snapshot_ref;
    s.r_fix = fix.snapshot_ref;
    s.root_introduction = trace.status == TraceResult::Status::root_introduction;

    result.accepted = true;
    result.sample = std::move(s);
    return result;
}

// ---------------------------------------------------------------------------
// manifest and sample persistence

std::vector<ManifestEntry> read_manifest(const std::string& path) {
    std::vector<ManifestEntry> entries;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read manifest: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error("manifest line " + std::to_string(lineno) + ": " + e.what());
        }
        ManifestEntry m;
        m.cve_id = doc.at("cve_id").get<std::string>();
        m.cwe_id = doc.at("cwe_id").get<std::string>();
        m.repo = doc.at("repo").get<std::string>();
        m.vul_fix_commit = doc.at("vul_fix_commit").get<std::string>();
        if (doc.contains("file_hint")) m.file_hint = doc.at("file_hint").get<std::string>();
        entries.push_back(std::move(m));
    }
    return entries;
}

void write_samples(const std::string& dir, const std::vector<SampleResult>& results) {
    fs::create_directories(dir);
    std::ofstream samples(fs::path(dir) / "samples.jsonl", std::ios::binary);
    std::ofstream rejections(fs::path(dir) / "rejections.jsonl", std::ios::binary);
    std::ofstream log(fs::path(dir) / "build_log.txt", std::ios::binary);

    for (const auto& r : results) {
        if (!r.accepted) {
            json line = {{"cve_id", r.sample.cve_id}, {"reason", r.reject_reason}};
            rejections << line.dump() << '\n';
            continue;
        }
        const PairwiseSample& s = r.sample;
        json line = {{"sample_id", s.sample_id},
                     {"cve_id", s.cve_id},
                     {"cwe_id", s.cwe_id},
                     {"file", s.file},
                     {"function_name", s.function_name},
                     {"vul_intro_commit", s.vul_intro.id},
                     {"vul_fix_commit", s.vul_fix.id},
                     {"r_intro", s.r_intro},
                     {"r_fix", s.r_fix}};
        samples << line.dump() << '\n';

        std::ofstream vul(fs::path(dir) / (s.sample_id + ".vul.c"), std::ios::binary);
        vul << s.f_vul.verbatim;
        std::ofstream ben(fs::path(dir) / (s.sample_id + ".ben.c"), std::ios::binary);
        ben << s.f_ben.verbatim;

        log << s.sample_id << ": intro=" << s.vul_intro.id << " fix=" << s.vul_fix.id
            << (s.root_introduction ? " (introduced at history root)" : "") << '\n';
    }
}

std::vector<PairwiseSample> load_samples(const std::string& dir) {
    std::vector<PairwiseSample> out;
    fs::path samples_path = fs::path(dir) / "samples.jsonl";
    std::ifstream in(samples_path);
    if (!in) throw std::runtime_error("cannot read " + samples_path.string());

    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json doc = json::parse(line);
        PairwiseSample s;
        s.sample_id = doc.at("sample_id").get<std::string>();
        s.cve_id = doc.at("cve_id").get<std::string>();
        s.cwe_id = doc.at("cwe_id").get<std::string>();
        s.file = doc.at("file").get<std::string>();
        s.function_name = doc.at("function_name").get<std::string>();
        s.vul_intro.id = doc.at("vul_intro_commit").get<std::string>();
        s.vul_fix.id = doc.at("vul_fix_commit").get<std::string>();
        s.r_intro = doc.at("r_intro").get<std::string>();
        s.r_fix = doc.at("r_fix").get<std::string>();
        s.vul_intro.snapshot_ref = s.r_intro;
        s.vul_fix.snapshot_ref = s.r_fix;

        s.f_vul.verbatim = read_text_file(fs::path(dir) / (s.sample_id + ".vul.c"));
        s.f_ben.verbatim = read_text_file(fs::path(dir) / (s.sample_id + ".ben.c"));
        s.f_vul.normalized = normalize_body(s.f_vul.verbatim);
        s.f_ben.normalized = normalize_body(s.f_ben.verbatim);
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace jitscan::history
