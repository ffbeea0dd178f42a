#include "biocom/text.hpp"

#include <unicode/uchar.h>

#include "biocom/concept_id.hpp"

namespace biocom {

bool is_valid_concept_id(std::string_view id) {
  if (id.empty()) return false;
  for (char32_t c : text::decode_utf8(id)) {
    if (text::is_space(c)) return false;
  }
  return true;
}

}  // namespace biocom

namespace biocom::text {

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2, cp = b0 & 0x1F, min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3, cp = b0 & 0x0F, min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4, cp = b0 & 0x07, min = 0x10000;
    }
    bool ok = len != 0 && i + len <= n;
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (b & 0x3F);
    }
    if (ok && (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) ok = false;
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

std::size_t char_length(std::string_view s) { return decode_utf8(s).size(); }

std::string substr_chars(std::string_view s, std::size_t start, std::size_t end) {
  const auto chars = decode_utf8(s);
  if (start > chars.size()) start = chars.size();
  if (end > chars.size()) end = chars.size();
  if (end < start) end = start;
  return encode_utf8(std::u32string_view(chars).substr(start, end - start));
}

bool is_alnum(char32_t c) {
  if (c < 0x80) return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  return u_isalnum(static_cast<UChar32>(c)) != 0;
}

bool is_space(char32_t c) {
  if (c < 0x80) return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0;
}

char32_t fold_case(char32_t c) {
  if (c < 0x80) return (c >= 'A' && c <= 'Z') ? c + 32 : c;
  return static_cast<char32_t>(u_foldCase(static_cast<UChar32>(c), U_FOLD_CASE_DEFAULT));
}

NormalizedText normalize_with_offsets(std::u32string_view original, const NormalizationPolicy& policy) {
  NormalizedText out;
  out.original_length = original.size();
  out.chars.reserve(original.size());
  out.origin.reserve(original.size());
  bool in_space = false;
  for (std::size_t i = 0; i < original.size(); ++i) {
    char32_t c = original[i];
    if (policy.collapse_whitespace && is_space(c)) {
      if (!in_space) {
        out.chars.push_back(U' ');
        out.origin.push_back(i);
      }
      in_space = true;
      continue;
    }
    in_space = false;
    out.chars.push_back(policy.case_fold ? fold_case(c) : c);
    out.origin.push_back(i);
  }
  return out;
}

std::u32string normalize_key(std::u32string_view original, const NormalizationPolicy& policy) {
  std::u32string s = normalize_with_offsets(original, policy).chars;
  if (policy.collapse_whitespace) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && s[b] == U' ') ++b;
    while (e > b && s[e - 1] == U' ') --e;
    s = s.substr(b, e - b);
  }
  return s;
}

std::string normalize_key(std::string_view utf8, const NormalizationPolicy& policy) {
  return encode_utf8(normalize_key(decode_utf8(utf8), policy));
}

std::vector<Token> tokenize(std::string_view utf8) {
  const auto chars = decode_utf8(utf8);
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < chars.size()) {
    if (is_space(chars[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (is_alnum(chars[i])) {
      while (j < chars.size() && is_alnum(chars[j])) ++j;
    }
    tokens.push_back({encode_utf8(std::u32string_view(chars).substr(i, j - i)), i, j});
    i = j;
  }
  return tokens;
}

}  // namespace biocom::text
