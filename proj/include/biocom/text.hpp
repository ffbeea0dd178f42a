#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace biocom::text {

/// Decodes UTF-8 into Unicode scalar values. Invalid sequences decode to U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

/// Number of Unicode scalar values in `s`.
std::size_t char_length(std::string_view s);

/// Substring by code-point offsets [start, end).
std::string substr_chars(std::string_view s, std::size_t start, std::size_t end);

bool is_alnum(char32_t c);
bool is_space(char32_t c);
/// Simple (1:1) Unicode case folding.
char32_t fold_case(char32_t c);

/// Casing and whitespace rules applied before matching.
struct NormalizationPolicy {
  bool case_fold = true;
  bool collapse_whitespace = true;

  friend bool operator==(const NormalizationPolicy&, const NormalizationPolicy&) = default;
};

/// Text after normalization plus, per normalized character, the code-point
/// offset of the original character it came from.
struct NormalizedText {
  std::u32string chars;
  std::vector<std::size_t> origin;
  std::size_t original_length = 0;
};

/// Normalizes running text. Whitespace runs become one U+0020 that maps to the
/// first character of the run; nothing is trimmed so offsets stay total.
NormalizedText normalize_with_offsets(std::u32string_view original, const NormalizationPolicy& policy);

/// Normalizes a key (synonym or query surface): as above, and trimmed.
std::u32string normalize_key(std::u32string_view original, const NormalizationPolicy& policy);
std::string normalize_key(std::string_view utf8, const NormalizationPolicy& policy);

/// Word-ish tokens: maximal alphanumeric runs, or single non-space characters.
struct Token {
  std::string text;
  std::size_t start = 0;  // code-point offsets into the source
  std::size_t end = 0;
};
std::vector<Token> tokenize(std::string_view utf8);

}  // namespace biocom::text
