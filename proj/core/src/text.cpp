// SPDX-License-Identifier: Apache-2.0
#include "jitscan/text.hpp"

#include <algorithm>
#include <cctype>

namespace jitscan::text {

namespace {

enum class LexState { normal, line_comment, block_comment, string_lit, char_lit, preprocessor };

bool at_line_start(std::string_view src, std::size_t i) {
    while (i > 0) {
        char c = src[i - 1];
        if (c == '\n') return true;
        if (c != ' ' && c != '\t') return false;
        --i;
    }
    return true;
}

} // namespace

bool is_identifier_start(char c) {
    return c == '_' || std::isalpha(static_cast<unsigned char>(c));
}

bool is_identifier_char(char c) {
    return c == '_' || std::isalnum(static_cast<unsigned char>(c));
}

std::string mask_code(std::string_view src, const MaskOptions& opts) {
    std::string out(src);
    LexState state = LexState::normal;

    for (std::size_t i = 0; i < src.size(); ++i) {
        char c = src[i];
        char next = (i + 1 < src.size()) ? src[i + 1] : '\0';

        switch (state) {
        case LexState::normal:
            if (c == '/' && next == '/') {
                state = LexState::line_comment;
                out[i] = ' ';
            } else if (c == '/' && next == '*') {
                state = LexState::block_comment;
                out[i] = ' ';
                out[i + 1] = ' ';
                ++i;
            } else if (c == '"') {
                state = LexState::string_lit;
                if (opts.mask_strings) out[i] = ' ';
            } else if (c == '\'') {
                state = LexState::char_lit;
                if (opts.mask_strings) out[i] = ' ';
            } else if (opts.mask_preprocessor && c == '#' && at_line_start(src, i)) {
                state = LexState::preprocessor;
                out[i] = ' ';
            }
            break;
        case LexState::line_comment:
            if (c == '\n') state = LexState::normal;
            else out[i] = ' ';
            break;
        case LexState::block_comment:
            if (c == '*' && next == '/') {
                out[i] = ' ';
                out[i + 1] = ' ';
                ++i;
                state = LexState::normal;
            } else if (c != '\n') {
                out[i] = ' ';
            }
            break;
        case LexState::string_lit:
            if (c == '\\' && next != '\0') {
                if (opts.mask_strings) {
                    out[i] = ' ';
                    if (next != '\n') out[i + 1] = ' ';
                }
                ++i;
            } else if (c == '"') {
                if (opts.mask_strings) out[i] = ' ';
                state = LexState::normal;
            } else if (c == '\n') {
                // Unterminated on this line; real code ends string literals
                // before the newline, so recover rather than masking the file.
                state = LexState::normal;
            } else if (opts.mask_strings) {
                out[i] = ' ';
            }
            break;
        case LexState::char_lit:
            if (c == '\\' && next != '\0') {
                if (opts.mask_strings) {
                    out[i] = ' ';
                    if (next != '\n') out[i + 1] = ' ';
                }
                ++i;
            } else if (c == '\'') {
                if (opts.mask_strings) out[i] = ' ';
                state = LexState::normal;
            } else if (c == '\n') {
                state = LexState::normal;
            } else if (opts.mask_strings) {
                out[i] = ' ';
            }
            break;
        case LexState::preprocessor:
            if (c == '\n') {
                // backslash continuation keeps the directive going
                std::size_t j = i;
                while (j > 0 && (src[j - 1] == ' ' || src[j - 1] == '\t')) --j;
                if (j > 0 && src[j - 1] == '\\') break;
                state = LexState::normal;
            } else {
                out[i] = ' ';
            }
            break;
        }
    }
    return out;
}

std::string decode_utf8_lossy(std::string_view bytes) {
    static constexpr std::string_view kReplacement = "\xEF\xBF\xBD"; // U+FFFD
    std::string out;
    out.reserve(bytes.size());

    std::size_t i = 0;
    while (i < bytes.size()) {
        unsigned char b0 = static_cast<unsigned char>(bytes[i]);
        std::size_t len = 0;
        unsigned cp_min = 0;
        if (b0 < 0x80) {
            out.push_back(static_cast<char>(b0));
            ++i;
            continue;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp_min = 0x80;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp_min = 0x800;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp_min = 0x10000;
        } else {
            out.append(kReplacement);
            ++i;
            continue;
        }

        bool valid = i + len <= bytes.size();
        unsigned cp = b0 & (0x7F >> len);
        for (std::size_t k = 1; valid && k < len; ++k) {
            unsigned char bk = static_cast<unsigned char>(bytes[i + k]);
            if ((bk & 0xC0) != 0x80) valid = false;
            else cp = (cp << 6) | (bk & 0x3F);
        }
        if (valid && (cp < cp_min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)))
            valid = false;

        if (valid) {
            out.append(bytes.substr(i, len));
            i += len;
        } else {
            out.append(kReplacement);
            ++i;
        }
    }
    return out;
}

std::string slice_lines(std::string_view src, int start_line, int end_line) {
    if (start_line < 1) start_line = 1;
    if (end_line < start_line) return {};

    std::size_t begin = 0;
    int line = 1;
    while (line < start_line && begin < src.size()) {
        std::size_t nl = src.find('\n', begin);
        if (nl == std::string_view::npos) return {};
        begin = nl + 1;
        ++line;
    }

    std::size_t end = begin;
    while (line <= end_line && end < src.size()) {
        std::size_t nl = src.find('\n', end);
        if (nl == std::string_view::npos) {
            end = src.size();
            break;
        }
        if (line == end_line) {
            end = nl;
            break;
        }
        end = nl + 1;
        ++line;
    }
    // the clamp path can run past the last line's terminator
    if (end == src.size() && end > begin && src[end - 1] == '\n') --end;
    return std::string(src.substr(begin, end - begin));
}

int line_of_offset(std::string_view src, std::size_t pos) {
    pos = std::min(pos, src.size());
    return 1 + static_cast<int>(std::count(src.begin(), src.begin() + pos, '\n'));
}

} // namespace jitscan::text
