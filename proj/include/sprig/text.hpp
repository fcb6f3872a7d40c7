#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sprig {

/// Collapses whitespace runs to one space and trims both ends. Case is kept
/// because the regex entity heuristic depends on capitalization.
std::string normalize_text(std::string_view text);

/// Lowercased alphanumeric tokens. Bytes >= 0x80 are treated as part of a
/// token so UTF-8 words are not split apart. No stemming, no stopwords.
std::vector<std::string> tokenize(std::string_view text);

inline bool is_ascii_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace sprig
