// SPDX-License-Identifier: Apache-2.0
#include "jitscan/prompts.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace jitscan::agent {

namespace {

namespace fs = std::filesystem;

constexpr std::string_view kCotInstruction = "Solve this problem step by step...";

constexpr std::array<std::string_view, 5> kPlaceholders = {
    "target_function", "dependencies", "examples", "cot", "scratchpad"};

std::string read_template_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw MissingTemplate("template file not found: " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Substitute {name} tokens left to right; replacement text is never
/// rescanned. A known placeholder without a supplied value is an error;
/// unknown braced text passes through verbatim.
std::string render(std::string_view tmpl,
                   const std::vector<std::pair<std::string_view, const std::string*>>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] != '{') {
            out += tmpl[i++];
            continue;
        }
        std::size_t close = tmpl.find('}', i + 1);
        if (close == std::string_view::npos) {
            out += tmpl.substr(i);
            break;
        }
        std::string_view name = tmpl.substr(i + 1, close - i - 1);
        if (std::find(kPlaceholders.begin(), kPlaceholders.end(), name) == kPlaceholders.end()) {
            out += tmpl.substr(i, close - i + 1);
            i = close + 1;
            continue;
        }
        auto it = std::find_if(values.begin(), values.end(),
                               [&](const auto& kv) { return kv.first == name; });
        if (it == values.end())
            throw PlaceholderUnresolved("no value for placeholder {" + std::string(name) + "}");
        out += *it->second;
        i = close + 1;
    }
    return out;
}

std::string strip_trailing_newlines(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

FewShotExample parse_example_file(const fs::path& p) {
    std::string content = read_template_file(p);
    FewShotExample ex;
    std::string* section = nullptr;
    std::istringstream in(content);
    std::string line;
    bool first_line_of_section = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("CWE:", 0) == 0) {
            ex.cwe_id = line.substr(4);
            ex.cwe_id.erase(0, ex.cwe_id.find_first_not_of(" \t"));
            continue;
        }
        if (line == "[VULNERABLE CODE]") { section = &ex.vulnerable_code; first_line_of_section = true; continue; }
        if (line == "[VULNERABLE EXPLANATION]") { section = &ex.vulnerable_explanation; first_line_of_section = true; continue; }
        if (line == "[BENIGN CODE]") { section = &ex.benign_code; first_line_of_section = true; continue; }
        if (line == "[BENIGN EXPLANATION]") { section = &ex.benign_explanation; first_line_of_section = true; continue; }
        if (!section) continue;
        if (!first_line_of_section) *section += '\n';
        *section += line;
        first_line_of_section = false;
    }
    ex.vulnerable_code = strip_trailing_newlines(ex.vulnerable_code);
    ex.benign_code = strip_trailing_newlines(ex.benign_code);
    if (ex.cwe_id.empty() || ex.vulnerable_code.empty() || ex.benign_code.empty())
        throw MissingTemplate("incomplete example file: " + p.string());
    return ex;
}

} // namespace

std::string_view PromptLibrary::cot_instruction() { return kCotInstruction; }

PromptLibrary PromptLibrary::load(const std::string& template_dir) {
    fs::path dir(template_dir);
    PromptLibrary lib;
    lib.plain_ = read_template_file(dir / "plain.txt");
    lib.dep_aug_ = read_template_file(dir / "dep_aug.txt");
    lib.react_ = read_template_file(dir / "react.txt");

    fs::path fewshot = dir / "fewshot";
    if (fs::exists(fewshot)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(fewshot))
            if (entry.is_regular_file() && entry.path().extension() == ".txt")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) lib.examples_.push_back(parse_example_file(f));
    }
    return lib;
}

std::string PromptLibrary::render_examples() const {
    if (examples_.empty())
        throw MissingTemplate("few-shot strategy requested but no example files were loaded");
    std::ostringstream out;
    out << "Study these example pairs of a vulnerable function and its corrected benign "
           "version:\n\n";
    int n = 0;
    for (const auto& ex : examples_) {
        out << "Example pair " << ++n << " (" << ex.cwe_id << ")\n";
        out << "Vulnerable version:\n" << ex.vulnerable_code << "\n";
        out << "Why it is vulnerable: " << ex.vulnerable_explanation << "\n";
        out << "Benign version:\n" << ex.benign_code << "\n";
        out << "Why it is benign: " << ex.benign_explanation << "\n\n";
    }
    return out.str();
}

std::string PromptLibrary::render_dependencies(
    const std::vector<retrieval::RankedDependency>& deps) {
    if (deps.empty()) return "(no dependencies retrieved)";
    std::ostringstream out;
    bool first = true;
    for (const auto& d : deps) {
        if (!first) out << "\n\n";
        first = false;
        out << '[' << (d.relation == retrieval::Relation::caller ? "caller" : "callee") << "] "
            << d.function->name << " (" << d.function->file << ", line "
            << d.function->start_line << ")\n"
            << d.function->body;
    }
    return out.str();
}

std::string PromptLibrary::build_prompt(DetectorKind kind, const Strategy& strategy,
                                        std::string_view target_body,
                                        const std::vector<retrieval::RankedDependency>* deps,
                                        std::string_view scratchpad) const {
    std::string cot = strategy.cot ? std::string(kCotInstruction) + "\n\n" : "";
    std::string examples = strategy.few_shot ? render_examples() : "";
    std::string target(target_body);

    std::vector<std::pair<std::string_view, const std::string*>> values = {
        {"target_function", &target}, {"cot", &cot}, {"examples", &examples}};

    std::string dependencies;
    std::string scratch;
    switch (kind) {
    case DetectorKind::plain:
        return render(plain_, values);
    case DetectorKind::dep_aug:
        if (!deps) throw PlaceholderUnresolved("dep_aug prompt requires a dependency list");
        dependencies = render_dependencies(*deps);
        values.push_back({"dependencies", &dependencies});
        return render(dep_aug_, values);
    case DetectorKind::react:
        scratch = std::string(scratchpad);
        values.push_back({"scratchpad", &scratch});
        return render(react_, values);
    }
    throw PlaceholderUnresolved("unknown detector kind");
}

} // namespace jitscan::agent
