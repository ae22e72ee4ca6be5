// SPDX-License-Identifier: Apache-2.0
#include "jitscan/retrieval.hpp"

#include "jitscan/text.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace jitscan::retrieval {

TokenSet tokenize(std::string_view body) {
    text::MaskOptions opts{.mask_strings = true, .mask_preprocessor = false};
    std::string masked = text::mask_code(body, opts);

    TokenSet tokens;
    std::size_t i = 0;
    while (i < masked.size()) {
        if (!text::is_identifier_char(masked[i])) {
            ++i;
            continue;
        }
        std::size_t b = i;
        while (i < masked.size() && text::is_identifier_char(masked[i])) ++i;
        tokens.insert(std::string(masked.substr(b, i - b)));
    }
    return tokens;
}

double jaccard(const TokenSet& a, const TokenSet& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t inter = 0;
    const TokenSet& small = a.size() <= b.size() ? a : b;
    const TokenSet& large = a.size() <= b.size() ? b : a;
    for (const auto& t : small)
        if (large.count(t)) ++inter;
    std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

bool rank_less(const RankedDependency& a, const RankedDependency& b) {
    const auto& fa = *a.function;
    const auto& fb = *b.function;
    if (a.score != b.score) return a.score > b.score;
    return std::tie(fa.name, fa.file, fa.start_line) < std::tie(fb.name, fb.file, fb.start_line);
}

} // namespace

std::vector<RankedDependency> top_k_dependencies(const graph::CallGraph& g,
                                                 const graph::FunctionDef& target, int k,
                                                 PoolMode mode) {
    if (k <= 0) return {};

    auto same_def = [&](const graph::FunctionDef& f) {
        return f.file == target.file && f.name == target.name &&
               f.start_line == target.start_line;
    };

    // (file, name, start_line) -> relation; callers registered first win
    std::map<std::tuple<std::string, std::string, int>, std::pair<const graph::FunctionDef*, Relation>>
        pool;
    auto add = [&](const graph::FunctionDef* f, Relation rel) {
        if (same_def(*f)) return;
        pool.try_emplace({f->file, f->name, f->start_line}, f, rel);
    };

    auto find_exact = [&](const std::string& file, const std::string& name,
                          int start_line) -> const graph::FunctionDef* {
        for (const auto& f : g.functions())
            if (f.start_line == start_line && f.name == name && f.file == file) return &f;
        return nullptr;
    };

    for (const auto& e : g.edges()) {
        if (e.callee_name != target.name) continue;
        if (const auto* f = find_exact(e.caller_file, e.caller_name, e.caller_start_line))
            add(f, Relation::caller);
    }
    for (const auto& ce : g.callees_of(target)) {
        if (!ce.resolved) continue;
        auto q = g.get_definition(ce.name);
        if (q.def) add(q.def, Relation::callee);
        for (const auto* cand : q.candidates) add(cand, Relation::callee);
    }

    TokenSet target_tokens = tokenize(target.body);
    std::vector<RankedDependency> ranked;
    ranked.reserve(pool.size());
    for (const auto& [key, entry] : pool) {
        auto [f, rel] = entry;
        ranked.push_back({f, rel, jaccard(target_tokens, tokenize(f->body))});
    }
    std::sort(ranked.begin(), ranked.end(), rank_less);

    std::size_t kk = static_cast<std::size_t>(k);
    if (mode == PoolMode::shared) {
        if (ranked.size() > kk) ranked.resize(kk);
        return ranked;
    }

    std::vector<RankedDependency> out;
    std::size_t callers = 0, callees = 0;
    for (const auto& r : ranked) {
        std::size_t& taken = r.relation == Relation::caller ? callers : callees;
        if (taken < kk) {
            out.push_back(r);
            ++taken;
        }
    }
    return out;
}

} // namespace jitscan::retrieval
