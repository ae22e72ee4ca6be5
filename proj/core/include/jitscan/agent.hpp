// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "jitscan/backend.hpp"
#include "jitscan/code_graph.hpp"
#include "jitscan/prompts.hpp"
#include "jitscan/retrieval.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jitscan::agent {

enum class ToolKind { get_callers, get_callees, get_definition };

std::string_view tool_name(ToolKind t);

struct ToolCall {
    ToolKind tool = ToolKind::get_callers;
    std::string argument; // function name, nonempty
    std::optional<int> line;
};

struct Verdict {
    enum class Label { vul, ben };
    Label label = Label::ben;
    std::optional<std::string> cwe; // canonical CWE-<digits>
    std::string raw_answer;
};

std::string_view label_name(Verdict::Label l);

/// One entry of a detector trace.
struct Step {
    enum class Kind { thought, action, observation, final, abort };
    Kind kind = Kind::thought;
    std::string text; // thought/observation/final/abort payload
    std::optional<ToolCall> call;
};

struct Transcript {
    std::vector<Step> steps;
    int tool_invocations = 0;
    bool fallback = false; // verdict came from the parse-failure default
    bool aborted = false;
    std::string abort_reason;

    /// Plain-text Thought/Action/Observation/Final lines for diffing.
    std::string render() const;
};

/// Result of reading one model completion against the action grammar:
/// `Action: <tool>` + `Action Input: <arg>[, line <n>]`, or
/// `Final Answer: <text>`. The first marker line wins.
struct ParsedAction {
    enum class Kind { tool_call, final_answer, parse_failure };
    Kind kind = Kind::parse_failure;
    ToolCall call;
    std::string final_text;
    std::string thought;        // text preceding the matched marker
    std::string scratch_prefix; // completion up to and including Action Input
};

ParsedAction parse_action(std::string_view completion);

/// Label extraction: the first occurrence of "vulnerable" or "benign"
/// (case-insensitive) decides; the first CWE-<digits> pattern is captured.
struct VerdictParse {
    bool found_label = false;
    Verdict verdict;
};

VerdictParse parse_verdict(std::string_view final_text);

/// Execute one tool call against the graph and format the result as
/// observation text. Errors never escape; they render as observations.
std::string dispatch_tool(const graph::CallGraph& g, const ToolCall& call);

struct DetectorResult {
    Verdict verdict;
    Transcript transcript;
};

DetectorResult run_plain(ModelBackend& backend, const PromptLibrary& prompts,
                         const Strategy& strategy, std::string_view target_body);

DetectorResult run_dep_aug(ModelBackend& backend, const PromptLibrary& prompts,
                           const Strategy& strategy, const graph::CallGraph& g,
                           const graph::FunctionDef& target, int k = 5,
                           retrieval::PoolMode mode = retrieval::PoolMode::shared);

DetectorResult run_react(ModelBackend& backend, const PromptLibrary& prompts,
                         const Strategy& strategy, const graph::CallGraph& g,
                         const graph::FunctionDef& target, int max_iterations = 10);

} // namespace jitscan::agent
