#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kpforge {

// Canonical word tokenizer: lowercases ASCII, splits on whitespace, and emits
// every maximal run of ASCII punctuation (hyphen included) as its own token.
// Non-ASCII bytes are treated as word characters.
std::vector<std::string> tokenize_text(std::string_view text);

bool is_punct_token(std::string_view token);

std::string to_lower_ascii(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep, std::size_t begin = 0,
                 std::size_t end = std::string::npos);

}  // namespace kpforge
