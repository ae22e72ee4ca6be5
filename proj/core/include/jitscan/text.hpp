// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace jitscan::text {

/// What a masking pass blanks out of C-like source. Comments are always
/// masked; the other lexical classes depend on the consumer:
/// function/call extraction masks everything, tokenization keeps
/// preprocessor lines, normalization keeps string contents intact.
struct MaskOptions {
    bool mask_strings = true;
    bool mask_preprocessor = false;
};

/// Replace masked characters with spaces, preserving length and line
/// structure exactly. Newlines are never masked. Unterminated comments
/// or literals are masked through end of input.
std::string mask_code(std::string_view source, const MaskOptions& opts);

/// Decode raw bytes as UTF-8, replacing every invalid sequence with
/// U+FFFD. Valid UTF-8 passes through unchanged.
std::string decode_utf8_lossy(std::string_view bytes);

/// Substring from the first character of line `start_line` to the last
/// character of line `end_line`, excluding the final line terminator.
/// Lines are 1-based inclusive. Out-of-range lines clamp to the text.
std::string slice_lines(std::string_view source, int start_line, int end_line);

/// 1-based line number of byte offset `pos`.
int line_of_offset(std::string_view source, std::size_t pos);

bool is_identifier_start(char c);
bool is_identifier_char(char c);

} // namespace jitscan::text
