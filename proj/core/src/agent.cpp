// SPDX-License-Identifier: Apache-2.0
#include "jitscan/agent.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace jitscan::agent {

namespace {

constexpr int kMaxRetriesPerStep = 2;

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.substr(0, prefix.size()) == prefix;
}

std::optional<ToolKind> tool_from_name(std::string_view name) {
    if (name == "get_callers") return ToolKind::get_callers;
    if (name == "get_callees") return ToolKind::get_callees;
    if (name == "get_definition") return ToolKind::get_definition;
    return std::nullopt;
}

struct Line {
    std::string_view text;
    std::size_t begin; // offset into the completion
    std::size_t end;   // offset one past the line (without the newline)
};

std::vector<Line> lines_of(std::string_view s) {
    std::vector<Line> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t nl = s.find('\n', pos);
        if (nl == std::string_view::npos) nl = s.size();
        out.push_back({s.substr(pos, nl - pos), pos, nl});
        if (nl == s.size()) break;
        pos = nl + 1;
    }
    return out;
}

/// "name" or "name, line N" -> (name, optional line)
bool parse_tool_argument(std::string_view raw, ToolCall& call) {
    std::string_view arg = trim(raw);
    std::size_t marker = arg.rfind(", line ");
    if (marker != std::string_view::npos) {
        std::string_view num = trim(arg.substr(marker + 7));
        if (!num.empty() &&
            std::all_of(num.begin(), num.end(),
                        [](unsigned char c) { return std::isdigit(c); })) {
            call.line = std::stoi(std::string(num));
            arg = trim(arg.substr(0, marker));
        }
    }
    if (arg.empty()) return false;
    call.argument = std::string(arg);
    return true;
}

std::string strip_label(std::string_view s, std::string_view label) {
    std::string_view t = trim(s);
    if (starts_with(t, label)) t = trim(t.substr(label.size()));
    return std::string(t);
}

} // namespace

std::string_view tool_name(ToolKind t) {
    switch (t) {
    case ToolKind::get_callers: return "get_callers";
    case ToolKind::get_callees: return "get_callees";
    case ToolKind::get_definition: return "get_definition";
    }
    return "unknown";
}

std::string_view label_name(Verdict::Label l) {
    return l == Verdict::Label::vul ? "vul" : "ben";
}

ParsedAction parse_action(std::string_view completion) {
    ParsedAction parsed;
    auto lines = lines_of(completion);

    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = trim(lines[i].text);

        if (starts_with(line, "Final Answer:")) {
            parsed.kind = ParsedAction::Kind::final_answer;
            std::size_t text_pos = lines[i].begin + lines[i].text.find("Final Answer:") + 13;
            parsed.final_text = std::string(trim(completion.substr(text_pos)));
            parsed.thought = strip_label(completion.substr(0, lines[i].begin), "Thought:");
            return parsed;
        }

        if (!starts_with(line, "Action:")) continue;

        auto kind = tool_from_name(trim(line.substr(7)));
        if (!kind) return parsed; // unknown tool name

        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            std::string_view input_line = trim(lines[j].text);
            if (input_line.empty()) continue;
            if (!starts_with(input_line, "Action Input:")) return parsed;

            ToolCall call;
            call.tool = *kind;
            if (!parse_tool_argument(input_line.substr(13), call)) return parsed;

            parsed.kind = ParsedAction::Kind::tool_call;
            parsed.call = std::move(call);
            parsed.thought = strip_label(completion.substr(0, lines[i].begin), "Thought:");
            parsed.scratch_prefix = std::string(trim(completion.substr(0, lines[j].end)));
            return parsed;
        }
        return parsed; // Action without Action Input
    }
    return parsed;
}

VerdictParse parse_verdict(std::string_view final_text) {
    VerdictParse out;
    out.verdict.raw_answer = std::string(final_text);

    std::string lower(final_text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

    std::size_t vul_pos = lower.find("vulnerable");
    std::size_t ben_pos = lower.find("benign");
    if (vul_pos == std::string::npos && ben_pos == std::string::npos) return out;
    out.found_label = true;
    out.verdict.label =
        vul_pos < ben_pos ? Verdict::Label::vul : Verdict::Label::ben;

    std::size_t pos = lower.find("cwe-");
    while (pos != std::string::npos) {
        std::size_t d = pos + 4;
        std::string digits;
        while (d < lower.size() && std::isdigit(static_cast<unsigned char>(lower[d])))
            digits += lower[d++];
        if (!digits.empty()) {
            out.verdict.cwe = "CWE-" + digits;
            break;
        }
        pos = lower.find("cwe-", pos + 1);
    }
    return out;
}

std::string dispatch_tool(const graph::CallGraph& g, const ToolCall& call) {
    std::ostringstream out;

    auto ambiguity_note = [&](const graph::DefinitionQuery& q, std::string_view name) {
        out << " Note: " << q.candidates.size() << " definitions of '" << name
            << "' exist; using " << q.def->file << " line " << q.def->start_line
            << "; supply a line number to disambiguate.";
    };

    switch (call.tool) {
    case ToolKind::get_callers: {
        auto callers = g.get_callers(call.argument);
        if (callers.empty()) return "No callers found.";
        out << "Callers of " << call.argument << ": ";
        for (std::size_t i = 0; i < callers.size(); ++i) {
            if (i) out << ", ";
            out << callers[i].name << " (line " << callers[i].line << ")";
        }
        return out.str();
    }
    case ToolKind::get_callees: {
        auto q = g.get_definition(call.argument, call.line);
        if (q.status == graph::DefinitionQuery::Status::not_found) {
            if (call.line && g.has_definition(call.argument))
                return "Error: no definition of '" + call.argument + "' contains line " +
                       std::to_string(*call.line) + ".";
            return "Error: function '" + call.argument + "' not found.";
        }
        auto callees = g.callees_of(*q.def);
        if (callees.empty()) out << "No callees found.";
        else {
            out << "Callees of " << call.argument << ": ";
            for (std::size_t i = 0; i < callees.size(); ++i) {
                if (i) out << ", ";
                out << callees[i].name << " (line " << callees[i].line
                    << (callees[i].resolved ? ")" : ", external)");
            }
        }
        if (q.status == graph::DefinitionQuery::Status::ambiguous)
            ambiguity_note(q, call.argument);
        return out.str();
    }
    case ToolKind::get_definition: {
        auto q = g.get_definition(call.argument, call.line);
        if (q.status == graph::DefinitionQuery::Status::not_found) {
            if (call.line && g.has_definition(call.argument))
                return "Error: no definition of '" + call.argument + "' contains line " +
                       std::to_string(*call.line) + ".";
            return "Error: function '" + call.argument + "' not found.";
        }
        out << "Definition of " << call.argument << " (" << q.def->file << ", lines "
            << q.def->start_line << "-" << q.def->end_line << "):";
        if (q.status == graph::DefinitionQuery::Status::ambiguous)
            ambiguity_note(q, call.argument);
        out << '\n' << q.def->body;
        return out.str();
    }
    }
    return "Error: unknown tool.";
}

std::string Transcript::render() const {
    std::ostringstream out;
    for (const auto& s : steps) {
        switch (s.kind) {
        case Step::Kind::thought:
            out << "Thought: " << s.text << '\n';
            break;
        case Step::Kind::action:
            out << "Action: " << tool_name(s.call->tool) << '\n'
                << "Action Input: " << s.call->argument;
            if (s.call->line) out << ", line " << *s.call->line;
            out << '\n';
            break;
        case Step::Kind::observation:
            out << "Observation: " << s.text << '\n';
            break;
        case Step::Kind::final:
            out << "Final Answer: " << s.text << '\n';
            break;
        case Step::Kind::abort:
            out << "Abort: " << s.text << '\n';
            break;
        }
    }
    return out.str();
}

namespace {

DetectorResult aborted_result(std::string reason) {
    DetectorResult r;
    r.transcript.aborted = true;
    r.transcript.abort_reason = reason;
    r.transcript.steps.push_back({Step::Kind::abort, std::move(reason), std::nullopt});
    return r;
}

/// Shared single-shot path for plain and dep_aug.
DetectorResult run_single_shot(ModelBackend& backend, const std::string& prompt) {
    DetectorResult r;
    std::string completion;
    try {
        completion = backend.complete(prompt);
    } catch (const BackendError& e) {
        return aborted_result(e.what());
    }

    auto vp = parse_verdict(completion);
    r.verdict = vp.verdict;
    if (!vp.found_label) {
        r.verdict.label = Verdict::Label::ben;
        r.transcript.fallback = true;
    }
    r.transcript.steps.push_back({Step::Kind::final, completion, std::nullopt});
    return r;
}

} // namespace

DetectorResult run_plain(ModelBackend& backend, const PromptLibrary& prompts,
                         const Strategy& strategy, std::string_view target_body) {
    return run_single_shot(backend,
                           prompts.build_prompt(DetectorKind::plain, strategy, target_body));
}

DetectorResult run_dep_aug(ModelBackend& backend, const PromptLibrary& prompts,
                           const Strategy& strategy, const graph::CallGraph& g,
                           const graph::FunctionDef& target, int k, retrieval::PoolMode mode) {
    auto deps = retrieval::top_k_dependencies(g, target, k, mode);
    return run_single_shot(
        backend, prompts.build_prompt(DetectorKind::dep_aug, strategy, target.body, &deps));
}

namespace {

/// Append one exchange to the model-visible scratchpad with a uniform
/// "Thought:" label. Reminders live only here, never in the transcript.
void append_scratch(std::string& scratchpad, std::string_view completion_part,
                    std::string_view observation) {
    std::string_view t = trim(completion_part);
    if (starts_with(t, "Thought:")) scratchpad += std::string(t);
    else {
        scratchpad += "Thought: ";
        scratchpad += std::string(t);
    }
    scratchpad += "\nObservation: ";
    scratchpad += std::string(observation);
    scratchpad += '\n';
}

constexpr std::string_view kFormatReminder =
    "Invalid format. Reply with 'Action: <tool>' and 'Action Input: <function name>', or "
    "'Final Answer: <label>'.";

constexpr std::string_view kLabelReminder =
    "Invalid final answer. State whether the function is vulnerable or benign.";

} // namespace

DetectorResult run_react(ModelBackend& backend, const PromptLibrary& prompts,
                         const Strategy& strategy, const graph::CallGraph& g,
                         const graph::FunctionDef& target, int max_iterations) {
    DetectorResult r;
    std::string scratchpad;
    std::string last_completion;

    auto fallback = [&](std::string_view why) {
        r.verdict.label = Verdict::Label::ben;
        r.verdict.cwe.reset();
        r.verdict.raw_answer = last_completion;
        r.transcript.fallback = true;
        r.transcript.steps.push_back(
            {Step::Kind::final, "benign (fallback: " + std::string(why) + ")", std::nullopt});
        return r;
    };

    for (int iteration = 0; iteration < max_iterations; ++iteration) {
        for (int attempt = 0; attempt <= kMaxRetriesPerStep; ++attempt) {
            std::string prompt =
                prompts.build_prompt(DetectorKind::react, strategy, target.body, nullptr,
                                     scratchpad);
            std::string completion;
            try {
                completion = backend.complete(prompt);
            } catch (const BackendError& e) {
                auto aborted = aborted_result(e.what());
                aborted.transcript.steps.insert(aborted.transcript.steps.begin(),
                                                r.transcript.steps.begin(),
                                                r.transcript.steps.end());
                aborted.transcript.tool_invocations = r.transcript.tool_invocations;
                return aborted;
            }
            last_completion = completion;

            ParsedAction parsed = parse_action(completion);

            if (parsed.kind == ParsedAction::Kind::tool_call) {
                std::string observation = dispatch_tool(g, parsed.call);
                if (!parsed.thought.empty())
                    r.transcript.steps.push_back(
                        {Step::Kind::thought, parsed.thought, std::nullopt});
                r.transcript.steps.push_back({Step::Kind::action, "", parsed.call});
                r.transcript.steps.push_back(
                    {Step::Kind::observation, observation, std::nullopt});
                r.transcript.tool_invocations += 1;
                append_scratch(scratchpad, parsed.scratch_prefix, observation);
                break; // next iteration
            }

            if (parsed.kind == ParsedAction::Kind::final_answer) {
                auto vp = parse_verdict(parsed.final_text);
                if (vp.found_label) {
                    if (!parsed.thought.empty())
                        r.transcript.steps.push_back(
                            {Step::Kind::thought, parsed.thought, std::nullopt});
                    r.transcript.steps.push_back(
                        {Step::Kind::final, parsed.final_text, std::nullopt});
                    r.verdict = vp.verdict;
                    return r;
                }
                // an answer with no label is a format failure, not a verdict
                r.transcript.steps.push_back({Step::Kind::thought, completion, std::nullopt});
                if (attempt == kMaxRetriesPerStep) return fallback("no parseable final answer");
                append_scratch(scratchpad, completion, kLabelReminder);
                continue;
            }

            r.transcript.steps.push_back({Step::Kind::thought, completion, std::nullopt});
            if (attempt == kMaxRetriesPerStep) return fallback("no parseable action");
            append_scratch(scratchpad, completion, kFormatReminder);
        }
    }
    return fallback("iteration budget exhausted");
}

} // namespace jitscan::agent
