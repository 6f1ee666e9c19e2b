#pragma once

// Cleaning pipeline for short social-media texts.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "itopic/error.hpp"

namespace itopic {

struct RawRecord {
  std::string id;
  std::string text;
};

struct Document {
  std::string id;
  std::string raw;
  std::string clean;
};

struct CleanConfig {
  std::size_t min_chars = 15;
  bool english_filter = true;
};

enum class RejectReason { TooShort, NotEnglish };

constexpr std::string_view to_string(RejectReason r) noexcept {
  return r == RejectReason::TooShort ? "TooShort" : "NotEnglish";
}

struct Rejected {
  std::string id;
  RejectReason reason;
};

using CleanResult = std::variant<Document, Rejected>;

namespace utf8 {

/// Decodes one code point starting at `pos`, advancing `pos`. Throws on malformed input.
inline char32_t next(std::string_view s, std::size_t& pos) {
  auto fail = [&] {
    throw Error(ErrorKind::MalformedUtf8, "invalid byte sequence at offset " + std::to_string(pos));
  };
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    fail();
  }
  if (pos + len > s.size()) fail();
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) fail();
    cp = (cp << 6) | (b & 0x3F);
  }
  // overlong forms, surrogates and out-of-range values
  static constexpr std::array<char32_t, 5> kMin = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail();
  pos += len;
  return cp;
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::vector<char32_t> decode(std::string_view s) {
  std::vector<char32_t> cps;
  cps.reserve(s.size());
  for (std::size_t pos = 0; pos < s.size();) cps.push_back(next(s, pos));
  return cps;
}

inline void validate(std::string_view s) {
  for (std::size_t pos = 0; pos < s.size();) next(s, pos);
}

inline std::size_t length(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < s.size(); ++n) next(s, pos);
  return n;
}

}  // namespace utf8

namespace text {

constexpr bool is_emoji(char32_t cp) noexcept {
  return (cp >= 0x1F000 && cp <= 0x1FAFF) || (cp >= 0x2600 && cp <= 0x27BF) || cp == 0xFE0F ||
         cp == 0x200D;
}

constexpr bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

constexpr bool is_punct(char c) noexcept {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
         (c >= '{' && c <= '~');
}

inline constexpr std::array<std::string_view, 50> kStopwords = {
    "the",  "be",    "to",   "of",    "and",   "a",    "in",    "that", "have",  "i",
    "it",   "for",   "not",  "on",    "with",  "he",   "as",    "you",  "do",    "at",
    "this", "but",   "his",  "by",    "from",  "they", "we",    "her",  "she",   "or",
    "an",   "will",  "my",   "all",   "there", "their", "what", "so",   "up",    "out",
    "if",   "about", "who",  "which", "me",    "is",   "are",   "was",  "were",  "been"};

inline std::string strip_emojis(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t pos = 0; pos < s.size();) {
    const std::size_t start = pos;
    const char32_t cp = utf8::next(s, pos);
    if (!is_emoji(cp)) out.append(s.substr(start, pos - start));
  }
  return out;
}

namespace detail {

inline bool starts_with_nocase(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (s.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = s[pos + i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != prefix[i]) return false;
  }
  return true;
}

}  // namespace detail

/// Replaces every substring beginning with "http://", "https://" or "www." and
/// running to the next whitespace by a single space.
inline std::string strip_urls(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) {
    if (detail::starts_with_nocase(s, pos, "http://") ||
        detail::starts_with_nocase(s, pos, "https://") ||
        detail::starts_with_nocase(s, pos, "www.")) {
      while (pos < s.size() && !is_space(s[pos])) ++pos;
      out.push_back(' ');
      continue;
    }
    out.push_back(s[pos++]);
  }
  return out;
}

/// Drops @-mentions and hyphen-led tokens, deletes ASCII punctuation and
/// collapses whitespace.
inline std::string strip_noise(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && is_space(s[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < s.size() && !is_space(s[pos])) ++pos;
    if (start == pos) break;
    const std::string_view tok = s.substr(start, pos - start);
    if (tok.front() == '@' || tok.front() == '-') continue;
    std::string kept;
    for (char c : tok)
      if (!is_punct(c)) kept.push_back(c);
    if (kept.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += kept;
  }
  return out;
}

inline std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

inline std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && is_space(s[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < s.size() && !is_space(s[pos])) ++pos;
    if (pos > start) out.push_back(s.substr(start, pos - start));
  }
  return out;
}

/// At least 90% ASCII code points and at least one common English stopword.
inline bool is_english(std::string_view s) {
  std::size_t total = 0, ascii = 0;
  for (std::size_t pos = 0; pos < s.size(); ++total)
    if (utf8::next(s, pos) < 0x80) ++ascii;
  if (total == 0 || ascii * 10 < total * 9) return false;
  for (auto tok : tokens(s))
    if (std::find(kStopwords.begin(), kStopwords.end(), tok) != kStopwords.end()) return true;
  return false;
}

inline std::string clean_text(std::string_view raw) {
  return to_lower_ascii(strip_noise(strip_emojis(strip_urls(raw))));
}

inline CleanResult clean_document(const RawRecord& rec, const CleanConfig& cfg) {
  if (rec.id.empty()) throw Error(ErrorKind::InvalidArgument, "record with empty id");
  utf8::validate(rec.text);
  std::string clean = clean_text(rec.text);
  if (utf8::length(clean) < cfg.min_chars) return Rejected{rec.id, RejectReason::TooShort};
  if (cfg.english_filter && !is_english(clean)) return Rejected{rec.id, RejectReason::NotEnglish};
  return Document{rec.id, rec.text, std::move(clean)};
}

}  // namespace text
}  // namespace itopic
