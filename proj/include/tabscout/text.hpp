#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tabscout {

std::string_view trim(std::string_view s);

/// ASCII case fold. Non-ASCII bytes pass through untouched.
std::string to_lower(std::string_view s);

/// Trim + case fold. Used wherever header strings are compared or counted.
std::string normalize_header(std::string_view header);

/// Lowercased maximal runs of ASCII alphanumerics (non-ASCII bytes count as
/// word characters so UTF-8 words stay intact).
std::vector<std::string> word_tokens(std::string_view s);

/// Replace invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view s);

/// Estimated LLM token count: ceil(chars / 4).
std::size_t estimate_tokens(std::string_view s);

bool iequals(std::string_view a, std::string_view b);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

} // namespace tabscout
