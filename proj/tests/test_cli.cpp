// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

namespace {

const std::string kCli = JITSCAN_CLI_PATH;

struct CommandResult {
    int exit_code = -1;
    std::string output; // stdout + stderr
};

CommandResult run_cli(const testsup::TempDir& dir, const std::string& args) {
    std::string out_path = dir.sub("cli_out.txt");
    std::string cmd = kCli + " " + args + " >'" + out_path + "' 2>&1";
    int status = std::system(cmd.c_str());
    CommandResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = testsup::read_file(out_path);
    return r;
}

void write_snapshot(const testsup::TempDir& dir) {
    testsup::write_file(dir.path() / "snap" / "a.c",
                        "int helper(int x) { return x + 1; }\n"
                        "int entry(int y) { return helper(y); }\n");
}

} // namespace

TEST_CASE("cli: graph build and query") {
    testsup::TempDir dir("cli_graph");
    write_snapshot(dir);

    auto build = run_cli(dir, "graph build '" + dir.sub("snap") + "' -o '" +
                                  dir.sub("g.json") + "'");
    CHECK(build.exit_code == 0);
    CHECK(build.output == "functions: 2, edges: 1, diagnostics: 0\n");
    CHECK(std::filesystem::exists(dir.path() / "g.json"));

    auto callers = run_cli(dir, "graph query callers helper --snapshot '" + dir.sub("snap") +
                                    "' --graph '" + dir.sub("g.json") + "'");
    CHECK(callers.exit_code == 0);
    CHECK(callers.output == "Callers of helper: entry (line 2)\n");

    auto def = run_cli(dir, "graph query def entry --snapshot '" + dir.sub("snap") + "'");
    CHECK(def.exit_code == 0);
    CHECK(def.output ==
          "Definition of entry (a.c, lines 2-2):\nint entry(int y) { return helper(y); }\n");

    auto deps = run_cli(dir, "graph query deps entry --snapshot '" + dir.sub("snap") + "'");
    CHECK(deps.exit_code == 0);
    CHECK(deps.output.find("callee  helper") != std::string::npos);

    auto missing = run_cli(dir, "graph query deps ghost --snapshot '" + dir.sub("snap") + "'");
    CHECK(missing.exit_code == 1);
    CHECK(missing.output == "Error: function 'ghost' not found.\n");
}

TEST_CASE("cli: pair build, run and eval pipeline") {
    testsup::TempDir dir("cli_pipe");
    testsup::write_dir_history(dir.path() / "hist", {"fixc", "midc", "rootc"}, "a.c",
                               {"int t(void) { return 0; }\n",
                                "int t(void) { return 666; }\n",
                                "int t(void) { return 1; }\n"});
    testsup::write_file(dir.path() / "manifest.jsonl",
                        std::string(R"({"cve_id":"CVE-2024-7","cwe_id":"CWE-78","repo":")") +
                            (dir.path() / "hist").generic_string() +
                            R"(","vul_fix_commit":"fixc"})" + "\n");

    auto pair = run_cli(dir, "pair build --manifest '" + dir.sub("manifest.jsonl") + "' -o '" +
                                 dir.sub("samples") + "'");
    CHECK(pair.exit_code == 0);
    CHECK(pair.output == "accepted: 1, rejected: 0\n");

    testsup::write_file(dir.path() / "script.jsonl",
                        R"({"text":"vulnerable, CWE-78"})"
                        "\n"
                        R"({"text":"benign"})"
                        "\n");
    auto run = run_cli(dir, "run --samples '" + dir.sub("samples") + "' --script '" +
                                dir.sub("script.jsonl") + "' -o '" + dir.sub("out") +
                                "' --templates '" + JITSCAN_TEMPLATES_DIR + "'");
    CHECK(run.exit_code == 0);
    CHECK(run.output.find("records: 2, aborts: 0") != std::string::npos);

    auto table = run_cli(dir, "eval '" + dir.sub("out") + "'");
    CHECK(table.exit_code == 0);
    CHECK(table.output.find("plain+vanilla") != std::string::npos);

    auto json = run_cli(dir, "eval '" + dir.sub("out") + "' --format json --histogram-csv '" +
                                 dir.sub("hist.csv") + "'");
    CHECK(json.exit_code == 0);
    CHECK(json.output.find("\"pacc\": 1.0") != std::string::npos);
    CHECK(testsup::read_file(dir.path() / "hist.csv").substr(0, 18) == "invocations,count\n");
}

TEST_CASE("cli: scan with a known list") {
    testsup::TempDir dir("cli_scan");
    write_snapshot(dir);
    testsup::write_file(dir.path() / "known.jsonl",
                        R"({"file":"a.c","function_name":"helper"})"
                        "\n");
    testsup::write_file(dir.path() / "script.jsonl",
                        R"({"text":"vulnerable, CWE-120"})"
                        "\n"
                        R"({"text":"benign"})"
                        "\n");
    auto scan = run_cli(dir, "scan '" + dir.sub("snap") + "' --known '" + dir.sub("known.jsonl") +
                                 "' --script '" + dir.sub("script.jsonl") + "' -o '" +
                                 dir.sub("out") + "' --templates '" + JITSCAN_TEMPLATES_DIR +
                                 "'");
    CHECK(scan.exit_code == 0);
    CHECK(scan.output.find("detected 1/1, marked 1/2") != std::string::npos);
    CHECK(std::filesystem::exists(dir.path() / "out" / "scan_result.json"));
}

TEST_CASE("cli: errors exit nonzero with a message") {
    testsup::TempDir dir("cli_err");
    write_snapshot(dir);
    testsup::write_file(dir.path() / "empty_samples" / "samples.jsonl", "");
    testsup::write_file(dir.path() / "s.jsonl", R"({"text":"benign"})" "\n");

    auto bad_strategy =
        run_cli(dir, "run --samples '" + dir.sub("empty_samples") + "' --script '" +
                         dir.sub("s.jsonl") + "' --strategy nonsense -o '" + dir.sub("o") + "'");
    CHECK(bad_strategy.exit_code == 1);
    CHECK(bad_strategy.output.find("error:") != std::string::npos);

    auto no_args = run_cli(dir, "");
    CHECK(no_args.exit_code != 0);

    auto bad_eval = run_cli(dir, "eval '" + dir.sub("nowhere") + "'");
    CHECK(bad_eval.exit_code == 1);
    CHECK(bad_eval.output.find("error:") != std::string::npos);
}
