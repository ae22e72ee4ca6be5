// SPDX-License-Identifier: Apache-2.0
#include "jitscan/prompts.hpp"

#include "jitscan/retrieval.hpp"
#include "support.hpp"

#include <doctest.h>

#include <filesystem>

using namespace jitscan;
using agent::DetectorKind;
using agent::PromptLibrary;
using agent::Strategy;

namespace {

const char* kTemplatesDir = JITSCAN_TEMPLATES_DIR;
const char* kGoldenDir = JITSCAN_GOLDEN_DIR;

const PromptLibrary& lib() {
    static PromptLibrary l = PromptLibrary::load(kTemplatesDir);
    return l;
}

Strategy strat(bool cot, bool fs) { return Strategy{.cot = cot, .few_shot = fs}; }

} // namespace

TEST_CASE("strategy names cover the whole matrix") {
    CHECK(strat(false, false).name() == "vanilla");
    CHECK(strat(true, false).name() == "cot");
    CHECK(strat(false, true).name() == "fs");
    CHECK(strat(true, true).name() == "cot_fs");
}

TEST_CASE("load parses the shipped example pairs") {
    const auto& ex = lib().examples();
    REQUIRE(ex.size() == 10);
    for (const auto& e : ex) {
        CHECK(e.cwe_id.substr(0, 4) == "CWE-");
        CHECK_FALSE(e.vulnerable_code.empty());
        CHECK_FALSE(e.vulnerable_explanation.empty());
        CHECK_FALSE(e.benign_code.empty());
        CHECK_FALSE(e.benign_explanation.empty());
    }
    CHECK(ex[0].cwe_id == "CWE-787");
}

TEST_CASE("vanilla plain prompt embeds the target and nothing optional") {
    std::string p = lib().build_prompt(DetectorKind::plain, strat(false, false), "int t() { }");
    CHECK(p.find("int t() { }") != std::string::npos);
    CHECK(p.find(PromptLibrary::cot_instruction()) == std::string::npos);
    CHECK(p.find("Example pair") == std::string::npos);
    for (const char* slot : {"{cot}", "{examples}", "{target_function}"})
        CHECK(p.find(slot) == std::string::npos);
}

TEST_CASE("cot variants contain the literal step-by-step instruction") {
    CHECK(PromptLibrary::cot_instruction().find("Solve this problem step by step") == 0);
    for (auto kind : {DetectorKind::plain, DetectorKind::react}) {
        std::string p = lib().build_prompt(kind, strat(true, false), "int t() { }");
        CHECK(p.find("Solve this problem step by step") != std::string::npos);
    }
}

TEST_CASE("few-shot variants include every shipped example pair") {
    std::string p = lib().build_prompt(DetectorKind::plain, strat(false, true), "int t() { }");
    for (std::size_t i = 1; i <= lib().examples().size(); ++i) {
        std::string marker = "Example pair " + std::to_string(i) + " (";
        CHECK(p.find(marker) != std::string::npos);
    }
    for (const auto& e : lib().examples()) {
        CHECK(p.find(e.cwe_id) != std::string::npos);
        CHECK(p.find(e.vulnerable_code) != std::string::npos);
        CHECK(p.find(e.benign_code) != std::string::npos);
    }
}

TEST_CASE("cot_fs equals fs with the instruction inserted before the examples") {
    std::string fs = lib().build_prompt(DetectorKind::plain, strat(false, true), "int t() { }");
    std::string cot_fs =
        lib().build_prompt(DetectorKind::plain, strat(true, true), "int t() { }");
    std::size_t pos = fs.find("Study these example pairs");
    REQUIRE(pos != std::string::npos);
    std::string expected = fs.substr(0, pos) + std::string(PromptLibrary::cot_instruction()) +
                           "\n\n" + fs.substr(pos);
    CHECK(cot_fs == expected);
}

TEST_CASE("dep_aug requires a dependency list") {
    CHECK_THROWS_AS(
        (void)lib().build_prompt(DetectorKind::dep_aug, strat(false, false), "int t() { }"),
        agent::PlaceholderUnresolved);

    auto g = testsup::golden_graph();
    const auto& target = testsup::find_def(g, "fetch_url");
    auto deps = retrieval::top_k_dependencies(g, target, 5);
    std::string p =
        lib().build_prompt(DetectorKind::dep_aug, strat(false, false), target.body, &deps);
    CHECK(p.find("[caller] handle_request (net/server.c, line 1)") != std::string::npos);
    CHECK(p.find("[callee] parse_uri (net/fetch.c, line 1)") != std::string::npos);
    CHECK(p.find(target.body) != std::string::npos);
}

TEST_CASE("dep_aug renders an explicit empty marker") {
    std::vector<retrieval::RankedDependency> none;
    std::string p =
        lib().build_prompt(DetectorKind::dep_aug, strat(false, false), "int t() { }", &none);
    CHECK(p.find("(no dependencies retrieved)") != std::string::npos);
}

TEST_CASE("react prompt carries the scratchpad and ends at the thought cue") {
    std::string empty_pad =
        lib().build_prompt(DetectorKind::react, strat(false, false), "int t() { }");
    CHECK(empty_pad.substr(empty_pad.size() - 8) == "Thought:");

    std::string pad = "Thought: look around\nObservation: No callers found.\n";
    std::string with_pad =
        lib().build_prompt(DetectorKind::react, strat(false, false), "int t() { }", nullptr, pad);
    CHECK(with_pad.find(pad) != std::string::npos);
    CHECK(with_pad.find("get_callers") != std::string::npos);
    CHECK(with_pad.find("get_callees") != std::string::npos);
    CHECK(with_pad.find("get_definition") != std::string::npos);
}

TEST_CASE("missing template files are reported by name") {
    testsup::TempDir dir("empty_templates");
    CHECK_THROWS_AS((void)PromptLibrary::load(dir.str()), agent::MissingTemplate);
}

TEST_CASE("few-shot strategy without example files fails loudly") {
    testsup::TempDir dir("no_examples");
    for (const char* name : {"plain.txt", "dep_aug.txt", "react.txt"})
        testsup::write_file(dir.path() / name, "{cot}{examples}{target_function}{dependencies}"
                                               "{scratchpad}");
    auto l = PromptLibrary::load(dir.str());
    CHECK_THROWS_AS((void)l.build_prompt(DetectorKind::plain, strat(false, true), "b"),
                    agent::MissingTemplate);
}

TEST_CASE("unknown braced text passes through untouched") {
    testsup::TempDir dir("braces");
    testsup::write_file(dir.path() / "plain.txt",
                        "{cot}{examples}body: {target_function} struct x = {0};");
    testsup::write_file(dir.path() / "dep_aug.txt", "{target_function}{dependencies}"
                                                    "{cot}{examples}");
    testsup::write_file(dir.path() / "react.txt", "{cot}{examples}{target_function}{scratchpad}");
    auto l = PromptLibrary::load(dir.str());
    std::string p = l.build_prompt(DetectorKind::plain, strat(false, false), "if (a) { b(); }");
    CHECK(p == "body: if (a) { b(); } struct x = {0};");
}

TEST_CASE("malformed example files are load errors") {
    testsup::TempDir dir("badex");
    for (const char* name : {"plain.txt", "dep_aug.txt", "react.txt"})
        testsup::write_file(dir.path() / name, "{cot}{examples}{target_function}{dependencies}"
                                               "{scratchpad}");
    testsup::write_file(dir.path() / "fewshot" / "01_broken.txt",
                        "CWE: CWE-79\n[VULNERABLE CODE]\nint x;\n");
    CHECK_THROWS_AS((void)PromptLibrary::load(dir.str()), agent::MissingTemplate);
}

TEST_CASE("golden prompt matrix stays frozen") {
    auto g = testsup::golden_graph();
    const auto& target = testsup::find_def(g, "fetch_url");
    auto deps = retrieval::top_k_dependencies(g, target, 5);

    const std::pair<DetectorKind, const char*> kinds[] = {
        {DetectorKind::plain, "plain"},
        {DetectorKind::dep_aug, "dep_aug"},
        {DetectorKind::react, "react"},
    };
    const std::pair<Strategy, const char*> strategies[] = {
        {strat(false, false), "vanilla"},
        {strat(true, false), "cot"},
        {strat(false, true), "fs"},
        {strat(true, true), "cot_fs"},
    };

    int compared = 0;
    for (const auto& [kind, kind_name] : kinds) {
        for (const auto& [strategy, strat_name] : strategies) {
            std::string rendered = lib().build_prompt(
                kind, strategy, target.body,
                kind == DetectorKind::dep_aug ? &deps : nullptr);
            auto path = std::filesystem::path(kGoldenDir) /
                        (std::string(kind_name) + "_" + strat_name + ".txt");
            INFO("golden file: ", path.string());
            REQUIRE(std::filesystem::exists(path));
            CHECK(rendered == testsup::read_file(path));
            ++compared;
        }
    }
    CHECK(compared == 12);
}
