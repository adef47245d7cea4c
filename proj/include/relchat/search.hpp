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

// Full-text side: an in-memory BM25 inverted index over title + body, with
// sentence-level extraction of the best matching sentence per hit.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "relchat/discourse.hpp"
#include "relchat/error.hpp"
#include "relchat/kb.hpp"
#include "relchat/text.hpp"

namespace relchat {

struct Document {
  std::string doc_id;
  std::string title;
  std::string body;
  std::optional<std::string> linked_entity;
};

struct SearchResult {
  std::string doc_id;
  double score = 0.0;
  std::string best_sentence;
  std::size_t sentence_index = 0;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// Text that gets indexed for a document.
inline std::vector<std::string> document_terms(const Document& d) {
  auto terms = tokenize(d.title);
  auto body = tokenize(d.body);
  terms.insert(terms.end(), body.begin(), body.end());
  return terms;
}

class Index {
 public:
  struct Posting {
    std::size_t doc = 0;
    std::size_t tf = 0;
  };

  Index() = default;

  explicit Index(std::vector<Document> docs, Bm25Params params = {})
      : docs_(std::move(docs)), params_(params) {
    std::set<std::string> ids;
    double total = 0.0;
    for (std::size_t i = 0; i < docs_.size(); ++i) {
      if (!ids.insert(docs_[i].doc_id).second) {
        throw DuplicateDocId("duplicate doc id: " + docs_[i].doc_id);
      }
      if (trim(docs_[i].body).empty()) throw Error("document with empty body: " + docs_[i].doc_id);
      auto terms = document_terms(docs_[i]);
      lengths_.push_back(terms.size());
      total += static_cast<double>(terms.size());
      std::map<std::string, std::size_t> tf;
      for (const auto& t : terms) ++tf[t];
      for (const auto& [term, count] : tf) postings_[term].push_back({i, count});
      by_id_.emplace(docs_[i].doc_id, i);
    }
    avgdl_ = docs_.empty() ? 0.0 : total / static_cast<double>(docs_.size());
  }

  std::size_t size() const { return docs_.size(); }
  const std::vector<Document>& documents() const { return docs_; }
  double average_length() const { return avgdl_; }
  std::size_t length(std::size_t doc) const { return lengths_.at(doc); }
  const Bm25Params& params() const { return params_; }

  std::size_t document_frequency(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
  }

  std::set<std::string> vocabulary() const {
    std::set<std::string> v;
    for (const auto& [term, _] : postings_) v.insert(term);
    return v;
  }

  const Document* find(const std::string& doc_id) const {
    auto it = by_id_.find(doc_id);
    return it == by_id_.end() ? nullptr : &docs_[it->second];
  }

  // Non-negative idf: ln(1 + (N - df + 0.5) / (df + 0.5)).
  double idf(const std::string& term) const {
    double n = static_cast<double>(docs_.size());
    double df = static_cast<double>(document_frequency(term));
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
  }

  // Top-k documents by BM25 over the distinct query terms; ties broken by
  // doc_id ascending. Documents sharing no term with the query are omitted.
  std::vector<SearchResult> query(std::string_view text, std::size_t k) const {
    if (k < 1) throw Error("query: k must be >= 1");
    auto raw = tokenize(text);
    std::set<std::string> terms(raw.begin(), raw.end());
    std::unordered_map<std::size_t, double> scores;
    for (const auto& term : terms) {
      auto it = postings_.find(term);
      if (it == postings_.end()) continue;
      double w = idf(term);
      for (const auto& p : it->second) {
        double tf = static_cast<double>(p.tf);
        double norm = params_.k1 * (1.0 - params_.b +
                                    params_.b * static_cast<double>(lengths_[p.doc]) / avgdl_);
        scores[p.doc] += w * tf * (params_.k1 + 1.0) / (tf + norm);
      }
    }
    std::vector<std::pair<std::size_t, double>> ranked(scores.begin(), scores.end());
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return docs_[a.first].doc_id < docs_[b.first].doc_id;
    });
    if (ranked.size() > k) ranked.resize(k);

    std::vector<SearchResult> out;
    for (const auto& [doc, score] : ranked) {
      SearchResult r;
      r.doc_id = docs_[doc].doc_id;
      r.score = score;
      auto [idx, sentence] = best_sentence(docs_[doc].body, terms);
      r.sentence_index = idx;
      r.best_sentence = std::move(sentence);
      out.push_back(std::move(r));
    }
    return out;
  }

  // Sentence with the most distinct query terms; earliest wins ties.
  static std::pair<std::size_t, std::string> best_sentence(const std::string& body,
                                                           const std::set<std::string>& terms) {
    auto spans = split_sentences(body);
    std::size_t best = 0;
    std::size_t best_overlap = 0;
    for (std::size_t i = 0; i < spans.size(); ++i) {
      auto toks = tokenize(spans[i].view(body));
      std::set<std::string> distinct(toks.begin(), toks.end());
      std::size_t overlap = 0;
      for (const auto& t : terms) overlap += distinct.count(t);
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best = i;
      }
    }
    if (spans.empty()) return {0, trim(body)};
    return {best, std::string(spans[best].view(body))};
  }

 private:
  std::vector<Document> docs_;
  Bm25Params params_;
  std::vector<std::size_t> lengths_;
  double avgdl_ = 0.0;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

inline Index build_index(std::vector<Document> docs) { return Index(std::move(docs)); }

inline std::vector<Document> parse_corpus(std::istream& in, const std::string& origin) {
  std::vector<Document> docs;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Document d;
      d.doc_id = j.at("doc_id").get<std::string>();
      d.title = j.value("title", std::string{});
      d.body = j.at("body").get<std::string>();
      if (j.contains("linked_entity") && !j["linked_entity"].is_null()) {
        d.linked_entity = j["linked_entity"].get<std::string>();
      }
      if (trim(d.body).empty()) throw ParseError(origin, number, "empty body");
      docs.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(origin, number, e.what());
    }
  }
  return docs;
}

inline std::vector<Document> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open corpus: " + path);
  return parse_corpus(in, path);
}

inline std::string first_sentence(std::string_view text) {
  if (trim(text).empty()) throw EmptyText("first_sentence: empty text");
  auto spans = split_sentences(text);
  return std::string(spans.front().view(text));
}

// Focal entity name (if any) followed by the user's content words: tokens
// that are neither stopwords, pronouns, nor already part of the name.
inline std::string make_query(const std::optional<std::string>& focal_name,
                              std::string_view user_text, const WordSet& stopwords) {
  std::vector<std::string> parts;
  std::set<std::string> name_tokens;
  if (focal_name) {
    parts.push_back(*focal_name);
    auto toks = tokenize(*focal_name);
    name_tokens.insert(toks.begin(), toks.end());
  }
  std::set<std::string> seen;
  for (const auto& tok : tokenize(user_text)) {
    if (stopwords.count(tok) || pronouns().count(tok) || name_tokens.count(tok)) continue;
    if (!seen.insert(tok).second) continue;
    parts.push_back(tok);
  }
  return join(parts, " ");
}

// The focal entity is the first entity the user's text refers to, either by
// name or anaphorically.
inline std::string make_query(const DiscourseState& state, std::string_view user_text,
                              const KnowledgeBase& kb, const WordSet& stopwords) {
  auto mentions = find_mentions(user_text, state, kb, stopwords);
  std::optional<std::string> focal;
  if (!mentions.empty()) focal = kb.at(mentions.front().entity_id).name;
  return make_query(focal, user_text, stopwords);
}

}  // namespace relchat
