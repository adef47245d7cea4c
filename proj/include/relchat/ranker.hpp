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

// Pool-and-rank: every candidate, whatever its source, is described by the
// same feature vector and scored with a linear function.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "relchat/acts.hpp"
#include "relchat/discourse.hpp"
#include "relchat/error.hpp"
#include "relchat/kb.hpp"
#include "relchat/relations.hpp"
#include "relchat/text.hpp"

namespace relchat {

inline constexpr std::size_t kFeatureCount = 8;
inline constexpr std::size_t kLengthCap = 40;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "length_words",   "source_is_search", "source_is_structured", "answers_question",
    "relation_match", "novelty",          "entity_overlap",       "info_density"};

struct FeatureVector {
  double length_words = 0;
  double source_is_search = 0;
  double source_is_structured = 0;
  double answers_question = 0;
  double relation_match = 0;
  double novelty = 0;
  double entity_overlap = 0;
  double info_density = 0;

  std::array<double, kFeatureCount> values() const {
    return {length_words, source_is_search, source_is_structured, answers_question,
            relation_match, novelty, entity_overlap, info_density};
  }

  static FeatureVector from_values(const std::array<double, kFeatureCount>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
  }

  std::map<std::string, double> to_map() const {
    std::map<std::string, double> m;
    auto v = values();
    for (std::size_t i = 0; i < kFeatureCount; ++i) m.emplace(kFeatureNames[i], v[i]);
    return m;
  }

  static FeatureVector from_map(const std::map<std::string, double>& m) {
    std::array<double, kFeatureCount> v{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      auto it = m.find(std::string(kFeatureNames[i]));
      if (it == m.end()) throw Error("feature missing: " + std::string(kFeatureNames[i]));
      v[i] = it->second;
    }
    return from_values(v);
  }

  bool operator==(const FeatureVector&) const = default;
};

class Weights {
 public:
  Weights() = default;

  explicit Weights(const std::array<double, kFeatureCount>& values) : values_(values) {}

  // Must name every feature; unknown names are rejected.
  static Weights from_map(const std::map<std::string, double>& m) {
    std::array<double, kFeatureCount> v{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      auto it = m.find(std::string(kFeatureNames[i]));
      if (it == m.end()) throw Error("weights missing feature: " + std::string(kFeatureNames[i]));
      v[i] = it->second;
    }
    for (const auto& [name, _] : m) {
      if (std::find(kFeatureNames.begin(), kFeatureNames.end(), name) == kFeatureNames.end()) {
        throw Error("weights name unknown feature: " + name);
      }
    }
    return Weights(v);
  }

  // Hand-set. Answering and information density dominate and novelty is
  // rewarded. Staying on the focus entity plus the capped length term lets a
  // rich search extract beat a sparse structured sentence.
  static Weights defaults() {
    return from_map({{"length_words", 0.05},
                     {"source_is_search", 0.0},
                     {"source_is_structured", 0.5},
                     {"answers_question", 3.0},
                     {"relation_match", 1.0},
                     {"novelty", 2.0},
                     {"entity_overlap", 1.0},
                     {"info_density", 2.0}});
  }

  double operator[](std::size_t i) const { return values_.at(i); }
  const std::array<double, kFeatureCount>& values() const { return values_; }

  double dot(const FeatureVector& f) const {
    auto v = f.values();
    double s = 0.0;
    for (std::size_t i = 0; i < kFeatureCount; ++i) s += values_[i] * v[i];
    return s;
  }

  Weights scaled(double c) const {
    auto v = values_;
    for (auto& x : v) x *= c;
    return Weights(v);
  }

  std::map<std::string, double> to_map() const {
    std::map<std::string, double> m;
    for (std::size_t i = 0; i < kFeatureCount; ++i) m.emplace(kFeatureNames[i], values_[i]);
    return m;
  }

 private:
  std::array<double, kFeatureCount> values_{};
};

inline Weights load_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open weights: " + path);
  try {
    return Weights::from_map(nlohmann::json::parse(in).get<std::map<std::string, double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, e.what());
  }
}

struct Candidate : RelationCandidate {
  FeatureVector features;
  double score = 0.0;
  bool scored = false;

  Candidate() = default;
  explicit Candidate(RelationCandidate c) : RelationCandidate(std::move(c)) {}
};

struct FeatureContext {
  const KnowledgeBase& kb;
  const WordSet& stopwords;
};

namespace detail {

// Non-overlapping occurrences of any of the entity's names in `tokens`.
inline std::size_t count_mentions(const std::vector<std::string>& tokens, const Entity& e) {
  std::vector<std::vector<std::string>> names;
  for (const auto& alias : e.aliases) {
    auto t = tokenize(alias);
    if (!t.empty()) names.push_back(std::move(t));
  }
  std::sort(names.begin(), names.end(),
            [](const auto& a, const auto& b) { return a.size() > b.size(); });
  std::size_t count = 0;
  for (std::size_t i = 0; i < tokens.size();) {
    std::size_t matched = 0;
    for (const auto& n : names) {
      if (i + n.size() <= tokens.size() && std::equal(n.begin(), n.end(), tokens.begin() + i)) {
        matched = n.size();
        break;
      }
    }
    if (matched) {
      ++count;
      i += matched;
    } else {
      ++i;
    }
  }
  return count;
}

inline int source_order(ContentSource s) {
  switch (s) {
    case ContentSource::structured: return 0;
    case ContentSource::search: return 1;
    case ContentSource::template_: return 2;
  }
  return 3;
}

}  // namespace detail

inline FeatureVector extract_features(const RelationCandidate& c, const PolicyDecision& decision,
                                      const DiscourseState& state, const FeatureContext& ctx) {
  FeatureVector f;
  std::string text = c.utterance();
  f.length_words = static_cast<double>(std::min(split_words(text).size(), kLengthCap));
  f.source_is_search = c.source == ContentSource::search ? 1.0 : 0.0;
  f.source_is_structured = c.source == ContentSource::structured ? 1.0 : 0.0;
  f.answers_question = (decision.must_answer && c.dialogue_act == DialogueAct::ANSWER) ? 1.0 : 0.0;
  f.relation_match = decision.prefers(c.relation) ? 1.0 : 0.0;
  f.novelty = (c.content_key.empty() || !state.content_ledger.count(c.content_key)) ? 1.0 : 0.0;

  auto tokens = tokenize(text);
  // Overlap is measured against the conversation focus, not the candidate's.
  std::optional<std::string> focus = c.focus_entity;
  if (state.focus()) focus = state.focus()->entity_id;
  if (focus) {
    if (const Entity* e = ctx.kb.find(*focus)) {
      f.entity_overlap = static_cast<double>(detail::count_mentions(tokens, *e));
    }
  }
  if (!tokens.empty()) {
    std::set<std::string> content;
    for (const auto& t : tokens) {
      if (!ctx.stopwords.count(t)) content.insert(t);
    }
    f.info_density = static_cast<double>(content.size()) / static_cast<double>(tokens.size());
  }
  return f;
}

// Scores every candidate and orders the pool: score descending, then
// structured before search before template, then content key.
inline std::vector<Candidate> rank_pool(std::vector<Candidate> pool, const Weights& weights,
                                        const PolicyDecision& decision, const DiscourseState& state,
                                        const FeatureContext& ctx) {
  if (pool.empty()) throw EmptyPool("rank_pool: empty pool");
  for (auto& c : pool) {
    c.features = extract_features(c, decision, state, ctx);
    c.score = weights.dot(c.features);
    c.scored = true;
  }
  std::stable_sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    int sa = detail::source_order(a.source);
    int sb = detail::source_order(b.source);
    if (sa != sb) return sa < sb;
    return a.content_key < b.content_key;
  });
  return pool;
}

struct RatedSample {
  FeatureVector features;
  double rating = 0.0;
};

inline constexpr double kRidge = 1e-6;

// Least squares fit of rating ~ dot(w, features) through the normal
// equations with a small ridge term.
inline Weights fit_weights(const std::vector<RatedSample>& samples) {
  if (samples.size() < kFeatureCount) {
    throw InsufficientData("fit_weights needs at least " + std::to_string(kFeatureCount) +
                           " samples, got " + std::to_string(samples.size()));
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(kFeatureCount));
  Eigen::VectorXd y(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t r = 0; r < samples.size(); ++r) {
    auto v = samples[r].features.values();
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[c];
    }
    y(static_cast<Eigen::Index>(r)) = samples[r].rating;
  }
  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += kRidge;
  Eigen::VectorXd w = gram.ldlt().solve(x.transpose() * y);
  std::array<double, kFeatureCount> out{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) out[i] = w(static_cast<Eigen::Index>(i));
  return Weights(out);
}

// System turns that carry both features and a rating.
inline std::vector<RatedSample> rated_samples(const std::vector<TurnRecord>& turns) {
  std::vector<RatedSample> out;
  for (const auto& t : turns) {
    if (t.speaker != Speaker::system || !t.rating || t.features.empty()) continue;
    out.push_back({FeatureVector::from_map(t.features), *t.rating});
  }
  return out;
}

}  // namespace relchat
