// Copyright 2026 The relchat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// String utilities shared by every module: normalization for alias lookup,
// tokenization for retrieval and metrics, edit distance, sentence splitting.
// All functions are ASCII-oriented; bytes >= 0x80 are treated as separators
// by tokenize() and dropped by normalize().

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "relchat/error.hpp"

namespace relchat {

using WordSet = std::unordered_set<std::string>;

inline bool is_alnum(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}
inline bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}
inline bool is_upper(char c) {
  return std::isupper(static_cast<unsigned char>(c)) != 0;
}
inline char lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), lower);
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

// Collapses whitespace runs to one space and trims.
inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : s) {
    if (is_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

// Lowercase, strip punctuation, collapse whitespace. Used for every alias and
// surface-string comparison.
inline std::string normalize(std::string_view s) {
  std::string stripped;
  stripped.reserve(s.size());
  for (char c : s) {
    if (is_alnum(c)) {
      stripped.push_back(lower(c));
    } else if (is_space(c)) {
      stripped.push_back(' ');
    }
  }
  return collapse_whitespace(stripped);
}

// Lowercase and split on non-alphanumerics; empty tokens dropped.
inline std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : s) {
    if (is_alnum(c)) {
      cur.push_back(lower(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : s) {
    if (is_space(c)) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

inline bool starts_with_ci(std::string_view text, std::string_view prefix) {
  if (prefix.size() > text.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (lower(text[i]) != lower(prefix[i])) return false;
  }
  return true;
}

// Levenshtein distance, two-row dynamic program.
inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// 1 - edit_distance / max(len); 1.0 for two empty strings.
inline double similarity(std::string_view a, std::string_view b) {
  std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(a, b)) / static_cast<double>(longest);
}

// FNV-1a; stable across platforms, unlike std::hash.
inline std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the last character

  std::string_view view(std::string_view text) const {
    return text.substr(begin, end - begin);
  }
};

namespace detail {

inline bool is_closer(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']';
}

inline bool is_abbreviation(std::string_view text, std::size_t dot) {
  static const std::array<std::string_view, 7> kGuard = {"mr", "mrs", "dr", "st",
                                                         "vs", "e.g", "i.e"};
  std::size_t b = dot;
  while (b > 0 && !is_space(text[b - 1])) --b;
  std::string word = to_lower(text.substr(b, dot - b));
  while (!word.empty() && (word.front() == '(' || word.front() == '"')) word.erase(0, 1);
  return std::find(kGuard.begin(), kGuard.end(), word) != kGuard.end();
}

}  // namespace detail

// Splits on '.', '!' or '?' (plus trailing quotes/brackets) when followed by
// whitespace and a capital letter, or by the end of the text. A single '.'
// ending a guarded abbreviation (Mr., Mrs., Dr., St., vs., e.g., i.e.) never
// splits. Spans are trimmed.
inline std::vector<SentenceSpan> split_sentences(std::string_view text) {
  std::vector<SentenceSpan> spans;
  const std::size_t n = text.size();
  std::size_t start = 0;
  while (start < n && is_space(text[start])) ++start;

  auto push = [&](std::size_t b, std::size_t e) {
    while (e > b && is_space(text[e - 1])) --e;
    if (e > b) spans.push_back({b, e});
  };

  std::size_t i = start;
  while (i < n) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
    bool single_dot = (j == i + 1 && c == '.');
    while (j < n && detail::is_closer(text[j])) ++j;

    std::size_t k = j;
    while (k < n && is_space(text[k])) ++k;
    bool at_end = (k == n);
    bool boundary = at_end;
    if (!at_end && k > j) {
      std::size_t m = k;
      while (m < n && (text[m] == '"' || text[m] == '\'' || text[m] == '(')) ++m;
      boundary = m < n && is_upper(text[m]);
    }
    if (boundary && single_dot && detail::is_abbreviation(text, i)) boundary = false;

    if (boundary) {
      push(start, j);
      start = k;
    }
    i = j;
  }
  if (start < n) push(start, n);
  return spans;
}

inline std::vector<std::string> sentences_of(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& span : split_sentences(text)) out.emplace_back(span.view(text));
  return out;
}

// One entry per non-empty line; '#' starts a comment line.
inline WordSet load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open word list: " + path);
  WordSet words;
  std::string line;
  while (std::getline(in, line)) {
    std::string w = trim(line);
    if (w.empty() || w.front() == '#') continue;
    words.insert(to_lower(w));
  }
  return words;
}

// Personal pronouns recognized by the coreference rules and dropped from
// search queries.
inline const WordSet& pronouns() {
  static const WordSet kPronouns = {"it",  "its",  "he",   "him",   "his",  "himself",
                                    "she", "her",  "hers", "herself", "they", "them",
                                    "their", "theirs", "itself", "themselves"};
  return kPronouns;
}

// Reads a file line by line, invoking fn(line, line_number) for each
// non-blank line.
inline void for_each_line(const std::string& path,
                          const std::function<void(const std::string&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    fn(line, number);
  }
}

}  // namespace relchat
