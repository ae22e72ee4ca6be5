// SPDX-License-Identifier: Apache-2.0
#include "jitscan/retrieval.hpp"

#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace jitscan;
using retrieval::PoolMode;
using retrieval::Relation;
using retrieval::TokenSet;

TEST_CASE("tokenize splits on non-identifier characters") {
    auto t = retrieval::tokenize("int foo(int a) { return a + bar; }");
    CHECK(t == TokenSet{"int", "foo", "a", "return", "bar"});
}

TEST_CASE("tokenize masks strings and comments, keeps preprocessor text") {
    CHECK(retrieval::tokenize("x = \"hello world\"; // note") == TokenSet{"x"});
    auto t = retrieval::tokenize("#include <stdio.h>\nint x;");
    CHECK(t.count("include") == 1);
    CHECK(t.count("stdio") == 1);
    CHECK(t.count("x") == 1);
}

TEST_CASE("tokenize is case-sensitive and keeps digit runs attached") {
    auto t = retrieval::tokenize("Foo foo FOO x42 42");
    CHECK(t == TokenSet{"Foo", "foo", "FOO", "x42", "42"});
}

TEST_CASE("jaccard fixed points") {
    CHECK(retrieval::jaccard({"a", "b", "c"}, {"b", "c", "d"}) == 0.5);
    CHECK(retrieval::jaccard({}, {}) == 1.0);
    CHECK(retrieval::jaccard({"a"}, {}) == 0.0);
    CHECK(retrieval::jaccard({"a"}, {"a"}) == 1.0);
    CHECK(retrieval::jaccard({"a", "b"}, {"c", "d"}) == 0.0);
}

TEST_CASE("jaccard is symmetric") {
    TokenSet a{"x", "y", "z", "w"};
    TokenSet b{"y", "q"};
    CHECK(retrieval::jaccard(a, b) == retrieval::jaccard(b, a));
    CHECK(retrieval::jaccard(a, b) == doctest::Approx(1.0 / 5.0));
}

TEST_CASE("top_k ranks resolved callers and callees of the target") {
    auto g = testsup::golden_graph();
    const auto& target = testsup::find_def(g, "fetch_url");
    auto deps = retrieval::top_k_dependencies(g, target, 5);

    REQUIRE(deps.size() == 2); // http_get and split_authority are external
    for (const auto& d : deps) {
        CHECK(d.score >= 0.0);
        CHECK(d.score <= 1.0);
    }
    bool has_caller = false, has_callee = false;
    for (const auto& d : deps) {
        if (d.relation == Relation::caller) {
            has_caller = true;
            CHECK(d.function->name == "handle_request");
        } else {
            has_callee = true;
            CHECK(d.function->name == "parse_uri");
        }
    }
    CHECK(has_caller);
    CHECK(has_callee);

    SUBCASE("k truncates") {
        auto one = retrieval::top_k_dependencies(g, target, 1);
        REQUIRE(one.size() == 1);
        CHECK(one[0].score == deps[0].score);
    }
    SUBCASE("k <= 0 yields nothing") {
        CHECK(retrieval::top_k_dependencies(g, target, 0).empty());
    }
}

TEST_CASE("scores order the list descending with deterministic tie-break") {
    // four callers with identical body shapes tie on score;
    // ties resolve by (name, file, line)
    std::vector<graph::SourceFile> files;
    files.push_back({"m/a.c", "void zz(void) { target_fn(); }\n"
                              "void mm(void) { target_fn(); }\n"});
    files.push_back({"m/b.c", "void mm(void) { target_fn(); }\n"
                              "void aa(void) { target_fn(); }\n"});
    files.push_back({"m/t.c", "int target_fn(void) { int zz_local = 0; return zz_local; }\n"});
    auto g = graph::build_graph(files, "tie");
    const auto& target = testsup::find_def(g, "target_fn");

    auto deps = retrieval::top_k_dependencies(g, target, 10);
    REQUIRE(deps.size() == 4);
    // all four share one body shape, so scores tie; name asc, then file asc
    CHECK(deps[0].function->name == "aa");
    CHECK(deps[1].function->name == "mm");
    CHECK(deps[1].function->file == "m/a.c");
    CHECK(deps[2].function->name == "mm");
    CHECK(deps[2].function->file == "m/b.c");
    CHECK(deps[3].function->name == "zz");
    for (std::size_t i = 1; i < deps.size(); ++i) CHECK(deps[i - 1].score >= deps[i].score);
}

TEST_CASE("per-relation pooling keeps k of each side") {
    std::vector<graph::SourceFile> files;
    files.push_back({"p.c",
                     "void c1(void) { mid(); }\n"
                     "void c2(void) { mid(); }\n"
                     "void e1(void) { }\n"
                     "void e2(void) { }\n"
                     "void mid(void) { e1(); e2(); }\n"});
    auto g = graph::build_graph(files, "pool");
    const auto& target = testsup::find_def(g, "mid");

    auto shared = retrieval::top_k_dependencies(g, target, 2, PoolMode::shared);
    CHECK(shared.size() == 2);

    auto per = retrieval::top_k_dependencies(g, target, 2, PoolMode::per_relation);
    REQUIRE(per.size() == 4);
    int callers = 0, callees = 0;
    for (const auto& d : per) (d.relation == Relation::caller ? callers : callees)++;
    CHECK(callers == 2);
    CHECK(callees == 2);
    // still globally ordered
    for (std::size_t i = 1; i < per.size(); ++i) {
        CHECK(per[i - 1].score >= per[i].score);
    }
}

TEST_CASE("a function that both calls and is called by the target appears once") {
    std::vector<graph::SourceFile> files;
    files.push_back({"r.c", "void peer(void) { target_fn(); }\n"
                            "void target_fn(void) { peer(); }\n"});
    auto g = graph::build_graph(files, "dual");
    const auto& target = testsup::find_def(g, "target_fn");
    auto deps = retrieval::top_k_dependencies(g, target, 10);
    REQUIRE(deps.size() == 1);
    CHECK(deps[0].function->name == "peer");
    CHECK(deps[0].relation == Relation::caller); // callers register first
}

TEST_CASE("a recursive target does not retrieve itself") {
    std::vector<graph::SourceFile> files;
    files.push_back({"s.c", "int self(int n) { return n ? self(n - 1) : 0; }\n"});
    auto g = graph::build_graph(files, "self");
    CHECK(retrieval::top_k_dependencies(g, testsup::find_def(g, "self"), 10).empty());
}

TEST_CASE("ranked output is byte-stable across repeated runs") {
    auto g = testsup::golden_graph();
    const auto& target = testsup::find_def(g, "fetch_url");

    auto render = [&]() {
        std::ostringstream out;
        for (const auto& d : retrieval::top_k_dependencies(g, target, 5)) {
            out << d.function->name << '|' << d.function->file << '|'
                << d.function->start_line << '|'
                << (d.relation == Relation::caller ? "caller" : "callee") << '|' << d.score
                << '\n';
        }
        return out.str();
    };
    std::string first = render();
    CHECK_FALSE(first.empty());
    for (int i = 0; i < 9; ++i) CHECK(render() == first);
}
