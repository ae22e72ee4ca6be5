// SPDX-License-Identifier: Apache-2.0
// Shared fixtures for the unit and acceptance suites.
#pragma once

#include "jitscan/backend.hpp"
#include "jitscan/code_graph.hpp"
#include "jitscan/history.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

namespace testsup {

/// Self-removing directory under the system temp root.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        auto base = std::filesystem::temp_directory_path();
        path_ = base / ("jitscan_" + tag + "_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }
    std::string sub(const std::string& rel) const { return (path_ / rel).string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Three functions over two files; the fixture behind the golden prompts.
/// fetch_url calls parse_uri (resolved) and http_get (external);
/// handle_request calls fetch_url.
inline std::vector<jitscan::graph::SourceFile> golden_sources() {
    std::vector<jitscan::graph::SourceFile> files;
    files.push_back({"net/fetch.c",
                     "static int parse_uri(const char *uri, struct uri_parts *out) {\n"
                     "    if (!uri) return -1;\n"
                     "    return split_authority(uri, out);\n"
                     "}\n"
                     "\n"
                     "int fetch_url(const char *uri, char *buf, int len) {\n"
                     "    struct uri_parts parts;\n"
                     "    if (parse_uri(uri, &parts) < 0) return -1;\n"
                     "    return http_get(&parts, buf, len);\n"
                     "}\n"});
    files.push_back({"net/server.c",
                     "int handle_request(struct conn *c) {\n"
                     "    char buf[4096];\n"
                     "    return fetch_url(c->target, buf, sizeof buf);\n"
                     "}\n"});
    return files;
}

inline jitscan::graph::CallGraph golden_graph() {
    return jitscan::graph::build_graph(golden_sources(), "fixture:golden");
}

inline const jitscan::graph::FunctionDef& find_def(const jitscan::graph::CallGraph& g,
                                                   const std::string& name) {
    for (const auto& f : g.functions())
        if (f.name == name) return f;
    throw std::runtime_error("fixture function missing: " + name);
}

/// Scripted backend over inline completions.
inline std::unique_ptr<jitscan::agent::ScriptedBackend> scripted(std::vector<std::string> texts) {
    return std::make_unique<jitscan::agent::ScriptedBackend>(std::move(texts));
}

/// In-memory linear history for tracing tests: commit ids ordered head
/// first, one file map per commit.
class MemProvider : public jitscan::history::SnapshotProvider {
public:
    MemProvider(std::vector<std::string> ids,
                std::vector<std::map<std::string, std::string>> files)
        : ids_(std::move(ids)), files_(std::move(files)) {
        if (ids_.size() != files_.size())
            throw std::runtime_error("MemProvider: ids/files size mismatch");
    }

    std::optional<jitscan::history::CommitRef> find_commit(std::string_view id) const override {
        for (std::size_t i = 0; i < ids_.size(); ++i)
            if (ids_[i] == id) return ref(i);
        return std::nullopt;
    }

    jitscan::history::HistoryView history_from(std::string_view head_id) const override {
        jitscan::history::HistoryView hv;
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            if (!hv.chain.empty() || ids_[i] == head_id) hv.chain.push_back(ref(i));
        }
        return hv;
    }

    std::vector<jitscan::graph::SourceFile> load_snapshot(
        const jitscan::history::CommitRef& commit) const override {
        std::vector<jitscan::graph::SourceFile> out;
        for (const auto& [path, text] : files_.at(index_of(commit.id)))
            out.push_back({path, text});
        return out;
    }

    std::optional<std::string> read_file(const jitscan::history::CommitRef& commit,
                                         std::string_view path) const override {
        const auto& m = files_.at(index_of(commit.id));
        auto it = m.find(std::string(path));
        if (it == m.end()) return std::nullopt;
        return it->second;
    }

private:
    std::size_t index_of(const std::string& id) const {
        for (std::size_t i = 0; i < ids_.size(); ++i)
            if (ids_[i] == id) return i;
        throw std::runtime_error("MemProvider: unknown commit " + id);
    }

    jitscan::history::CommitRef ref(std::size_t i) const {
        jitscan::history::CommitRef c;
        c.id = ids_[i];
        if (i + 1 < ids_.size()) c.parent = ids_[i + 1];
        c.snapshot_ref = "mem:" + ids_[i];
        return c;
    }

    std::vector<std::string> ids_;
    std::vector<std::map<std::string, std::string>> files_;
};

/// Directory-per-commit history fixture writer. `bodies` is ordered head
/// first: bodies[i] is the full text of `file` at commit i; nullopt means
/// the file is absent there.
inline void write_dir_history(const std::filesystem::path& root,
                              const std::vector<std::string>& ids,
                              const std::string& file,
                              const std::vector<std::optional<std::string>>& bodies,
                              const std::map<std::string, std::string>& extra_files = {}) {
    std::ostringstream chain;
    chain << "[\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        chain << "  {\"id\": \"" << ids[i] << "\", \"dir\": \"s" << i << "\"}";
        chain << (i + 1 < ids.size() ? ",\n" : "\n");
    }
    chain << "]\n";
    write_file(root / "chain.json", chain.str());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::filesystem::create_directories(root / ("s" + std::to_string(i)));
        if (bodies[i]) write_file(root / ("s" + std::to_string(i)) / file, *bodies[i]);
        for (const auto& [path, text] : extra_files)
            write_file(root / ("s" + std::to_string(i)) / path, text);
    }
}

} // namespace testsup
