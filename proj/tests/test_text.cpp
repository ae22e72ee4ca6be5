// SPDX-License-Identifier: Apache-2.0
#include "jitscan/text.hpp"

#include <doctest.h>

using namespace jitscan::text;

TEST_CASE("mask_code blanks comments but keeps line structure") {
    std::string src = "int a; // trailing\nint b; /* one\ntwo */ int c;\n";
    std::string masked = mask_code(src, {});
    CHECK(masked.size() == src.size());
    std::string expected = "int a; " + std::string(11, ' ') + "\nint b; " + std::string(6, ' ') +
                           "\n" + std::string(6, ' ') + " int c;\n";
    CHECK(masked == expected);
}

TEST_CASE("mask_code masks string and char literals including delimiters") {
    std::string src = "x = \"ab\"; y = 'c';";
    CHECK(mask_code(src, {}) == "x =     ; y =    ;");
}

TEST_CASE("mask_code can keep string contents") {
    std::string src = "x = \"a // b\";";
    MaskOptions keep;
    keep.mask_strings = false;
    CHECK(mask_code(src, keep) == src);
    // comment markers inside a literal are not comments
    CHECK(mask_code(src, {}) == "x =         ;");
}

TEST_CASE("mask_code ignores call-like text inside comments and strings") {
    std::string src = "/* fake_fn(1); */ char* s = \"also_fake(2);\";";
    std::string masked = mask_code(src, {});
    CHECK(masked.find("fake_fn") == std::string::npos);
    CHECK(masked.find("also_fake") == std::string::npos);
}

TEST_CASE("mask_code preprocessor masking is opt-in") {
    std::string src = "#define F(x) ((x) + 1)\nint g;\n";
    CHECK(mask_code(src, {}).substr(0, 7) == "#define");
    MaskOptions all;
    all.mask_preprocessor = true;
    std::string masked = mask_code(src, all);
    CHECK(masked == std::string(22, ' ') + "\nint g;\n");
}

TEST_CASE("mask_code handles escaped quotes") {
    std::string src = "s = \"a\\\"b\"; t(1);";
    std::string masked = mask_code(src, {});
    CHECK(masked == "s =       ; t(1);");
}

TEST_CASE("unterminated block comment masks to end of input") {
    std::string src = "int a; /* open\nmore";
    std::string masked = mask_code(src, {});
    CHECK(masked == "int a; " + std::string(7, ' ') + "\n" + std::string(4, ' '));
}

TEST_CASE("decode_utf8_lossy passes valid text and replaces junk bytes") {
    CHECK(decode_utf8_lossy("plain ascii") == "plain ascii");
    CHECK(decode_utf8_lossy("caf\xc3\xa9") == "caf\xc3\xa9");
    std::string bad = "a\xffz";
    std::string fixed = decode_utf8_lossy(bad);
    CHECK(fixed.find('\xff') == std::string::npos);
    CHECK(fixed.find("\xef\xbf\xbd") != std::string::npos); // U+FFFD
    CHECK(fixed.front() == 'a');
    CHECK(fixed.back() == 'z');
}

TEST_CASE("slice_lines is 1-based inclusive without the final newline") {
    std::string src = "one\ntwo\nthree\n";
    CHECK(slice_lines(src, 1, 1) == "one");
    CHECK(slice_lines(src, 2, 3) == "two\nthree");
    CHECK(slice_lines(src, 1, 3) == "one\ntwo\nthree");
    SUBCASE("out-of-range clamps") {
        CHECK(slice_lines(src, 0, 99) == "one\ntwo\nthree");
        CHECK(slice_lines(src, 3, 99) == "three");
    }
    SUBCASE("no trailing newline on last line") {
        CHECK(slice_lines("a\nb", 2, 2) == "b");
    }
}

TEST_CASE("line_of_offset counts from 1") {
    std::string src = "ab\ncd\nef";
    CHECK(line_of_offset(src, 0) == 1);
    CHECK(line_of_offset(src, 2) == 1);
    CHECK(line_of_offset(src, 3) == 2);
    CHECK(line_of_offset(src, 7) == 3);
}

TEST_CASE("identifier character classes") {
    CHECK(is_identifier_start('_'));
    CHECK(is_identifier_start('A'));
    CHECK_FALSE(is_identifier_start('3'));
    CHECK(is_identifier_char('3'));
    CHECK_FALSE(is_identifier_char('-'));
}
