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

// Session metrics computed from transcripts.
//
// Conversational depth is the length of the longest run of consecutive turns
// during which the session topic stays set and unchanged. Turns before the
// first topic do not count.

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "relchat/acts.hpp"
#include "relchat/discourse.hpp"
#include "relchat/error.hpp"
#include "relchat/text.hpp"

namespace relchat {

struct SessionMetrics {
  std::int64_t duration_ms = 0;
  double mean_response_delay_ms = 0.0;
  bool delay_defined = false;
  double vocabulary_diversity = 0.0;
  std::map<std::pair<DialogueAct, DialogueAct>, std::size_t> da_bigrams;
  std::size_t conversational_depth = 0;
  std::size_t reprompt_count = 0;
  std::size_t turn_count = 0;
};

// Rejects empty transcripts, gaps in the index sequence, repeated speakers
// and timestamps that go backwards.
inline void check_transcript(const std::vector<TurnRecord>& turns) {
  if (turns.empty()) throw MalformedTranscript("transcript has no turns");
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (turns[i].index != i) {
      throw MalformedTranscript("turn " + std::to_string(i) + " has index " +
                                std::to_string(turns[i].index));
    }
    if (i == 0) continue;
    if (turns[i].speaker == turns[i - 1].speaker) {
      throw MalformedTranscript("turn " + std::to_string(i) + " does not alternate speakers");
    }
    if (turns[i].timestamp < turns[i - 1].timestamp) {
      throw MalformedTranscript("turn " + std::to_string(i) + " timestamp goes backwards");
    }
  }
}

inline SessionMetrics compute_metrics(const std::vector<TurnRecord>& turns) {
  check_transcript(turns);
  SessionMetrics m;
  m.turn_count = turns.size();
  m.duration_ms = turns.back().timestamp - turns.front().timestamp;

  double delay_sum = 0.0;
  std::size_t delays = 0;
  for (std::size_t i = 1; i < turns.size(); ++i) {
    if (turns[i].speaker == Speaker::system && turns[i - 1].speaker == Speaker::user) {
      delay_sum += static_cast<double>(turns[i].timestamp - turns[i - 1].timestamp);
      ++delays;
    }
  }
  if (delays > 0) {
    m.mean_response_delay_ms = delay_sum / static_cast<double>(delays);
    m.delay_defined = true;
  }

  std::set<std::string> types;
  std::size_t tokens = 0;
  for (const auto& t : turns) {
    if (t.speaker != Speaker::system) continue;
    for (auto& tok : tokenize(t.text)) {
      types.insert(std::move(tok));
      ++tokens;
    }
    if (t.dialogue_act == DialogueAct::REPROMPT) ++m.reprompt_count;
  }
  if (tokens > 0) m.vocabulary_diversity = static_cast<double>(types.size()) / static_cast<double>(tokens);

  for (std::size_t i = 1; i < turns.size(); ++i) {
    ++m.da_bigrams[{turns[i - 1].dialogue_act, turns[i].dialogue_act}];
  }

  std::optional<std::string> topic;
  std::size_t run = 0;
  for (const auto& t : turns) {
    if (t.topic && t.topic != topic) {
      topic = t.topic;
      run = 0;
    }
    if (topic) m.conversational_depth = std::max(m.conversational_depth, ++run);
  }
  return m;
}

inline std::string bigram_name(const std::pair<DialogueAct, DialogueAct>& b) {
  return std::string(to_string(b.first)) + "," + std::string(to_string(b.second));
}

inline nlohmann::json to_json(const SessionMetrics& m) {
  nlohmann::json bigrams = nlohmann::json::object();
  for (const auto& [b, n] : m.da_bigrams) bigrams[bigram_name(b)] = n;
  return {{"duration_ms", m.duration_ms},
          {"mean_response_delay_ms", m.mean_response_delay_ms},
          {"delay_defined", m.delay_defined},
          {"vocabulary_diversity", m.vocabulary_diversity},
          {"da_bigrams", bigrams},
          {"conversational_depth", m.conversational_depth},
          {"reprompt_count", m.reprompt_count},
          {"turn_count", m.turn_count}};
}

struct Aggregate {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct MetricsReport {
  std::size_t sessions = 0;
  std::vector<std::pair<std::string, Aggregate>> metrics;  // fixed order

  const Aggregate& at(const std::string& name) const {
    for (const auto& [n, a] : metrics) {
      if (n == name) return a;
    }
    throw Error("no aggregate named " + name);
  }
};

inline std::vector<std::pair<std::string, double>> scalar_metrics(const SessionMetrics& m) {
  return {{"duration_ms", static_cast<double>(m.duration_ms)},
          {"mean_response_delay_ms", m.mean_response_delay_ms},
          {"vocabulary_diversity", m.vocabulary_diversity},
          {"conversational_depth", static_cast<double>(m.conversational_depth)},
          {"reprompt_count", static_cast<double>(m.reprompt_count)},
          {"turn_count", static_cast<double>(m.turn_count)}};
}

inline MetricsReport summarize(const std::vector<SessionMetrics>& list) {
  if (list.empty()) throw EmptyList("summarize needs at least one session");
  MetricsReport r;
  r.sessions = list.size();
  auto first = scalar_metrics(list.front());
  for (std::size_t k = 0; k < first.size(); ++k) {
    Aggregate a{0.0, first[k].second, first[k].second};
    for (const auto& m : list) {
      double v = scalar_metrics(m)[k].second;
      a.mean += v;
      a.min = std::min(a.min, v);
      a.max = std::max(a.max, v);
    }
    a.mean /= static_cast<double>(list.size());
    r.metrics.emplace_back(first[k].first, a);
  }
  return r;
}

inline nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [name, a] : r.metrics) metrics[name] = {{"mean", a.mean}, {"min", a.min}, {"max", a.max}};
  return {{"sessions", r.sessions}, {"metrics", metrics}};
}

inline std::string to_text(const MetricsReport& r) {
  std::size_t width = 6;
  for (const auto& [name, _] : r.metrics) width = std::max(width, name.size());
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-*s %12s %12s %12s\n", static_cast<int>(width), "metric", "mean", "min",
                "max");
  out << buf;
  for (const auto& [name, a] : r.metrics) {
    std::snprintf(buf, sizeof buf, "%-*s %12.4f %12.4f %12.4f\n", static_cast<int>(width), name.c_str(),
                  a.mean, a.min, a.max);
    out << buf;
  }
  out << "sessions: " << r.sessions << "\n";
  return out.str();
}

}  // namespace relchat
