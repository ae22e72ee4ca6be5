// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "jitscan/retrieval.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace jitscan::agent {

enum class DetectorKind { plain, dep_aug, react };

/// The four prompting strategies: vanilla, cot, fs, cot_fs.
struct Strategy {
    bool cot = false;
    bool few_shot = false;

    std::string name() const {
        if (cot && few_shot) return "cot_fs";
        if (cot) return "cot";
        if (few_shot) return "fs";
        return "vanilla";
    }
};

/// One shipped example pair, loaded from a template file.
struct FewShotExample {
    std::string cwe_id;
    std::string vulnerable_code;
    std::string vulnerable_explanation;
    std::string benign_code;
    std::string benign_explanation;
};

struct MissingTemplate : std::runtime_error {
    explicit MissingTemplate(const std::string& what) : std::runtime_error(what) {}
};

struct PlaceholderUnresolved : std::runtime_error {
    explicit PlaceholderUnresolved(const std::string& what) : std::runtime_error(what) {}
};

/// Templates loaded from a directory: plain.txt, dep_aug.txt, react.txt and
/// fewshot/*.txt. Placeholders: {target_function}, {dependencies},
/// {examples}, {cot}, {scratchpad}.
class PromptLibrary {
public:
    /// Throws MissingTemplate when a template file is absent or an example
    /// file fails to parse.
    static PromptLibrary load(const std::string& template_dir);

    /// Assemble the prompt for one detector invocation. `deps` is required
    /// for dep_aug and ignored otherwise; `scratchpad` applies to react.
    /// Throws PlaceholderUnresolved when the template names a placeholder
    /// this call provides no value for.
    std::string build_prompt(DetectorKind kind, const Strategy& strategy,
                             std::string_view target_body,
                             const std::vector<retrieval::RankedDependency>* deps = nullptr,
                             std::string_view scratchpad = {}) const;

    const std::vector<FewShotExample>& examples() const { return examples_; }

    /// The exact chain-of-thought instruction inserted at {cot}.
    static std::string_view cot_instruction();

private:
    std::string plain_;
    std::string dep_aug_;
    std::string react_;
    std::vector<FewShotExample> examples_;

    std::string render_examples() const;
    static std::string render_dependencies(const std::vector<retrieval::RankedDependency>& deps);
};

} // namespace jitscan::agent
