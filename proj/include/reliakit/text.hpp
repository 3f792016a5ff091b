// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <cstddef>
#include <string>
#include <string_view>

#include "reliakit/error.hpp"

namespace reliakit {

namespace detail {

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline UChar32 fold_quote(UChar32 c) {
  switch (c) {
    case 0x2018:  // left single quotation mark
    case 0x2019:  // right single quotation mark
    case 0x201B:
    case 0x2032:  // prime
    case 0x02BC:  // modifier letter apostrophe
      return U'\'';
    case 0x201C:
    case 0x201D:
    case 0x201F:
    case 0x2033:
      return U'"';
    default:
      return c;
  }
}

inline bool is_strippable(UChar32 c) {
  return u_isUWhiteSpace(c) || u_ispunct(c);
}

}  // namespace detail

/// Canonical form used for every answer comparison: NFKC compatibility
/// folding, lowercase, typographic quotes folded to ASCII, whitespace runs
/// collapsed to one space, leading/trailing punctuation and whitespace
/// removed. Invalid UTF-8 sequences become U+FFFD rather than failing.
inline std::string normalize(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfkc = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(std::string("ICU NFKC normalizer unavailable: ") +
                u_errorName(status));
  }
  icu::UnicodeString source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString folded = nfkc->normalize(source, status);
  if (U_FAILURE(status)) {
    throw Error(std::string("NFKC normalization failed: ") +
                u_errorName(status));
  }
  folded.toLower(icu::Locale::getRoot());

  icu::UnicodeString collapsed;
  bool pending_space = false;
  for (int32_t i = 0; i < folded.length();) {
    UChar32 c = folded.char32At(i);
    i = folded.moveIndex32(i, 1);
    if (u_isUWhiteSpace(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !collapsed.isEmpty()) collapsed.append(UChar32{U' '});
    pending_space = false;
    collapsed.append(detail::fold_quote(c));
  }

  int32_t begin = 0;
  int32_t end = collapsed.length();
  while (begin < end) {
    UChar32 c = collapsed.char32At(begin);
    if (!detail::is_strippable(c)) break;
    begin = collapsed.moveIndex32(begin, 1);
  }
  while (end > begin) {
    int32_t prev = collapsed.moveIndex32(end, -1);
    UChar32 c = collapsed.char32At(prev);
    if (!detail::is_strippable(c)) break;
    end = prev;
  }

  std::string out;
  collapsed.tempSubStringBetween(begin, end).toUTF8String(out);
  return out;
}

/// Whitespace-delimited word count (ASCII whitespace).
inline std::size_t count_tokens(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (char c : text) {
    if (detail::is_ascii_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++count;
    }
  }
  return count;
}

inline std::string_view trim_ascii(std::string_view s) {
  while (!s.empty() && detail::is_ascii_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && detail::is_ascii_space(s.back())) s.remove_suffix(1);
  return s;
}

/// Replaces every occurrence of `from` (non-empty) with `to`.
inline std::string replace_all(std::string text, std::string_view from,
                               std::string_view to) {
  if (from.empty()) return text;
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

}  // namespace reliakit
