// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "jitscan/code_graph.hpp"

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace jitscan::retrieval {

/// Distinct identifier-character tokens of a masked function body.
using TokenSet = std::set<std::string>;

/// Split on non-identifier characters after comment/string masking.
/// Case-sensitive; keywords retained; set semantics.
TokenSet tokenize(std::string_view body);

/// |a ∩ b| / |a ∪ b|. Two empty sets are maximally similar: 1.0.
double jaccard(const TokenSet& a, const TokenSet& b);

enum class Relation { caller, callee };

/// How callers and callees compete for the k slots: one shared ranked pool,
/// or k per relation.
enum class PoolMode { shared, per_relation };

struct RankedDependency {
    const graph::FunctionDef* function = nullptr;
    Relation relation = Relation::caller;
    double score = 0.0; // Jaccard similarity in [0, 1]
};

/// Rank the resolved callers and callees of `target` by body similarity.
/// Sorted by (score desc, name asc, file asc, start_line asc); the target
/// itself is excluded; fewer than k candidates yield a shorter list.
std::vector<RankedDependency> top_k_dependencies(const graph::CallGraph& g,
                                                 const graph::FunctionDef& target, int k = 5,
                                                 PoolMode mode = PoolMode::shared);

} // namespace jitscan::retrieval
