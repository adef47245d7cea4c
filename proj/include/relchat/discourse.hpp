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

// Per-session conversational context: turn history, entity salience, topic,
// the content-use ledger and pending offers, plus rule-based reference
// resolution over the salience list.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relchat/acts.hpp"
#include "relchat/error.hpp"
#include "relchat/kb.hpp"
#include "relchat/text.hpp"

namespace relchat {

// A system move that waits for the user's acceptance, e.g. offering a story.
struct Offer {
  std::string kind;  // "story"
  std::string key;   // story id
  std::string text;

  bool operator==(const Offer&) const = default;
};

struct TurnRecord {
  std::size_t index = 0;
  Speaker speaker = Speaker::user;
  std::string text;
  DialogueAct dialogue_act = DialogueAct::STATEMENT;
  std::vector<std::string> mentioned_entities;
  std::optional<DiscourseRelation> relation_used;
  std::optional<ContentSource> source_used;
  std::int64_t timestamp = 0;  // milliseconds

  // Session bookkeeping carried on the record so a transcript replays into
  // the same state.
  std::vector<std::string> content_keys;
  std::optional<std::string> topic;
  std::optional<Offer> offer;
  bool executed_offer = false;
  std::map<std::string, double> features;  // chosen candidate, system turns only
  std::optional<double> rating;

  bool operator==(const TurnRecord&) const = default;
};

struct SalienceEntry {
  std::string entity_id;
  std::size_t last_mention_turn = 0;
  std::vector<std::string> type_path;

  bool operator==(const SalienceEntry&) const = default;
};

struct StoryCursor {
  std::string story_id;
  std::size_t next = 0;

  bool operator==(const StoryCursor&) const = default;
};

struct DiscourseState {
  std::vector<TurnRecord> turns;
  std::vector<SalienceEntry> salience;  // most recent first
  std::optional<std::string> topic;
  std::set<std::string> content_ledger;
  std::optional<Offer> pending_offer;
  std::optional<StoryCursor> story_cursor;

  const SalienceEntry* focus() const { return salience.empty() ? nullptr : &salience.front(); }
};

inline constexpr std::size_t kAnaphoraWindow = 5;

// Entries mentioned within the last kAnaphoraWindow turns of `state`,
// most recent first.
inline std::vector<const SalienceEntry*> salience_window(const DiscourseState& state) {
  std::size_t n = state.turns.size();
  std::size_t floor = n > kAnaphoraWindow ? n - kAnaphoraWindow : 0;
  std::vector<const SalienceEntry*> out;
  for (const auto& entry : state.salience) {
    if (entry.last_mention_turn >= floor) out.push_back(&entry);
  }
  return out;
}

// Story content keys have the form "story:<id>:<sentence>".
inline std::optional<StoryCursor> parse_story_key(const std::string& key) {
  if (key.rfind("story:", 0) != 0) return std::nullopt;
  auto last = key.rfind(':');
  if (last <= 6) return std::nullopt;
  try {
    std::size_t idx = std::stoul(key.substr(last + 1));
    return StoryCursor{key.substr(6, last - 6), idx};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline std::string story_key(const std::string& story_id, std::size_t sentence) {
  return "story:" + story_id + ":" + std::to_string(sentence);
}

// Idempotent. Emitting a story sentence moves the story cursor past it.
inline void mark_content_used(DiscourseState& state, const std::string& content_key) {
  state.content_ledger.insert(content_key);
  if (auto cursor = parse_story_key(content_key)) {
    state.story_cursor = StoryCursor{cursor->story_id, cursor->next + 1};
  }
}

inline void update_state(DiscourseState& state, const TurnRecord& turn, const KnowledgeBase& kb) {
  if (turn.index != state.turns.size()) {
    throw OutOfOrderTurn("expected turn " + std::to_string(state.turns.size()) + ", got " +
                         std::to_string(turn.index));
  }
  if (!state.turns.empty() && state.turns.back().speaker == turn.speaker) {
    throw OutOfOrderTurn("speakers must alternate at turn " + std::to_string(turn.index));
  }
  for (const auto& id : turn.mentioned_entities) {
    const Entity& e = kb.at(id);
    std::erase_if(state.salience, [&](const SalienceEntry& s) { return s.entity_id == id; });
    state.salience.insert(state.salience.begin(), SalienceEntry{id, turn.index, e.type_path});
  }
  if (turn.topic) state.topic = turn.topic;

  if (turn.speaker == Speaker::system) {
    for (const auto& key : turn.content_keys) mark_content_used(state, key);
    if (turn.executed_offer) state.pending_offer.reset();
    if (turn.offer) state.pending_offer = turn.offer;
  } else if (turn.dialogue_act == DialogueAct::REJECTION) {
    state.pending_offer.reset();
  }
  state.turns.push_back(turn);
}

namespace detail {

inline const WordSet& he_words() {
  static const WordSet k = {"he", "him", "his", "himself"};
  return k;
}
inline const WordSet& she_words() {
  static const WordSet k = {"she", "her", "hers", "herself"};
  return k;
}
inline const WordSet& it_words() {
  static const WordSet k = {"it", "its", "itself"};
  return k;
}
inline const WordSet& they_words() {
  static const WordSet k = {"they", "them", "their", "theirs", "themselves"};
  return k;
}

}  // namespace detail

// Recency + agreement rules over the salience window:
//   it/its        most salient non-Person
//   he/him/his    most salient Person not marked female
//   she/her       most salient Person not marked male
//   they/them     most salient plural entity or Person
//   "the X"       most salient entity whose types include X
inline std::string resolve_reference(const DiscourseState& state, std::string_view mention,
                                     const KnowledgeBase& kb) {
  std::string m = normalize(mention);
  auto window = salience_window(state);

  auto first = [&](auto pred) -> std::optional<std::string> {
    for (const SalienceEntry* entry : window) {
      const Entity* e = kb.find(entry->entity_id);
      if (e && pred(*e)) return entry->entity_id;
    }
    return std::nullopt;
  };

  std::optional<std::string> found;
  if (detail::it_words().count(m)) {
    found = first([&](const Entity& e) { return !kb.is_person(e); });
  } else if (detail::he_words().count(m)) {
    found = first([&](const Entity& e) { return kb.is_person(e) && kb.gender(e) != "female"; });
  } else if (detail::she_words().count(m)) {
    found = first([&](const Entity& e) { return kb.is_person(e) && kb.gender(e) != "male"; });
  } else if (detail::they_words().count(m)) {
    found = first([&](const Entity& e) { return kb.is_plural(e) || kb.is_person(e); });
  } else {
    std::string np = m;
    for (std::string_view det : {"the ", "that ", "this "}) {
      if (np.rfind(det, 0) == 0) {
        np = np.substr(det.size());
        break;
      }
    }
    if (auto type = kb.type_for_word(np)) {
      found = first([&](const Entity& e) { return kb.has_type(e, *type); });
    }
  }
  if (!found) throw NoAntecedent("no antecedent for \"" + std::string(mention) + "\"");
  return *found;
}

struct Mention {
  std::string surface;
  std::string entity_id;
  std::size_t position = 0;  // token offset in the normalized text
  bool anaphoric = false;
};

// Finds entity references in an utterance: exact alias n-grams (longest
// first), fuzzy links for capitalized spans, and pronouns / "the <type>"
// phrases resolved against `state`. Ordered by position.
inline std::vector<Mention> find_mentions(std::string_view text, const DiscourseState& state,
                                          const KnowledgeBase& kb, const WordSet& stopwords,
                                          bool resolve_anaphora = true) {
  struct Token {
    std::string norm;
    bool capital = false;
    bool sentence_start = false;
  };
  std::vector<Token> tokens;
  bool next_starts = true;
  for (const auto& raw : split_words(text)) {
    for (const auto& piece : split_words(normalize(raw))) {
      bool cap = false;
      for (char c : raw) {
        if (is_alnum(c)) {
          cap = is_upper(c);
          break;
        }
      }
      tokens.push_back({piece, cap, next_starts});
      next_starts = false;
    }
    char last = raw.empty() ? ' ' : raw.back();
    if (last == '.' || last == '!' || last == '?') next_starts = true;
  }

  const std::size_t n = tokens.size();
  std::vector<bool> covered(n, false);
  std::vector<Mention> mentions;
  constexpr std::size_t kMaxNgram = 8;

  auto choose = [&](const std::vector<std::string>& ids) {
    for (const auto& entry : state.salience) {
      if (std::find(ids.begin(), ids.end(), entry.entity_id) != ids.end()) return entry.entity_id;
    }
    return ids.front();
  };

  for (std::size_t len = std::min(kMaxNgram, n); len >= 1; --len) {
    for (std::size_t i = 0; i + len <= n; ++i) {
      if (std::any_of(covered.begin() + i, covered.begin() + i + len, [](bool b) { return b; })) {
        continue;
      }
      std::vector<std::string> words;
      for (std::size_t k = i; k < i + len; ++k) words.push_back(tokens[k].norm);
      if (len == 1 && (stopwords.count(words[0]) || pronouns().count(words[0]))) continue;
      const auto& ids = kb.ids_for_alias(join(words, " "));
      if (ids.empty()) continue;
      mentions.push_back({join(words, " "), choose(ids), i, false});
      std::fill(covered.begin() + i, covered.begin() + i + len, true);
    }
  }

  // Capitalized spans that did not match exactly may still be near-misses.
  for (std::size_t i = 0; i < n;) {
    if (covered[i] || !tokens[i].capital || tokens[i].norm == "i") {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && !covered[j] && tokens[j].capital && tokens[j].norm != "i") ++j;
    bool lone_initial = (j - i == 1 && tokens[i].sentence_start);
    if (!lone_initial) {
      std::vector<std::string> words;
      for (std::size_t k = i; k < j; ++k) words.push_back(tokens[k].norm);
      auto linked = kb.link(join(words, " "));
      if (!linked.empty()) {
        mentions.push_back({join(words, " "), linked.front().entity_id, i, false});
        std::fill(covered.begin() + i, covered.begin() + j, true);
      }
    }
    i = j;
  }

  if (resolve_anaphora) {
    for (std::size_t i = 0; i < n; ++i) {
      if (covered[i]) continue;
      std::string surface;
      std::size_t width = 1;
      if (pronouns().count(tokens[i].norm)) {
        surface = tokens[i].norm;
      } else if ((tokens[i].norm == "the" || tokens[i].norm == "that") && i + 1 < n &&
                 !covered[i + 1] && kb.type_for_word(tokens[i + 1].norm)) {
        surface = tokens[i].norm + " " + tokens[i + 1].norm;
        width = 2;
      } else {
        continue;
      }
      try {
        std::string id = resolve_reference(state, surface, kb);
        mentions.push_back({surface, id, i, true});
        std::fill(covered.begin() + i, covered.begin() + i + width, true);
      } catch (const NoAntecedent&) {
      }
    }
  }

  std::sort(mentions.begin(), mentions.end(),
            [](const Mention& a, const Mention& b) { return a.position < b.position; });
  return mentions;
}

// Mention ids in order of first appearance, duplicates removed.
inline std::vector<std::string> mention_ids(const std::vector<Mention>& mentions) {
  std::vector<std::string> ids;
  for (const auto& m : mentions) {
    if (std::find(ids.begin(), ids.end(), m.entity_id) == ids.end()) ids.push_back(m.entity_id);
  }
  return ids;
}

// ---- transcript persistence -------------------------------------------------

inline nlohmann::json to_json(const TurnRecord& t) {
  nlohmann::json j;
  j["index"] = t.index;
  j["speaker"] = std::string(to_string(t.speaker));
  j["text"] = t.text;
  j["dialogue_act"] = std::string(to_string(t.dialogue_act));
  j["mentioned_entities"] = t.mentioned_entities;
  j["relation_used"] = t.relation_used ? nlohmann::json(std::string(to_string(*t.relation_used)))
                                       : nlohmann::json(nullptr);
  j["source_used"] = t.source_used ? nlohmann::json(std::string(to_string(*t.source_used)))
                                   : nlohmann::json(nullptr);
  j["timestamp"] = t.timestamp;
  j["content_keys"] = t.content_keys;
  j["topic"] = t.topic ? nlohmann::json(*t.topic) : nlohmann::json(nullptr);
  if (t.offer) {
    j["offer"] = {{"kind", t.offer->kind}, {"key", t.offer->key}, {"text", t.offer->text}};
  } else {
    j["offer"] = nullptr;
  }
  j["executed_offer"] = t.executed_offer;
  if (!t.features.empty()) j["features"] = t.features;
  if (t.rating) j["rating"] = *t.rating;
  return j;
}

inline TurnRecord turn_from_json(const nlohmann::json& j) {
  TurnRecord t;
  t.index = j.at("index").get<std::size_t>();
  t.speaker = parse_speaker(j.at("speaker").get<std::string>());
  t.text = j.at("text").get<std::string>();
  t.dialogue_act = parse_act(j.at("dialogue_act").get<std::string>());
  t.mentioned_entities = j.value("mentioned_entities", std::vector<std::string>{});
  if (j.contains("relation_used") && !j["relation_used"].is_null()) {
    t.relation_used = parse_relation(j["relation_used"].get<std::string>());
  }
  if (j.contains("source_used") && !j["source_used"].is_null()) {
    t.source_used = parse_source(j["source_used"].get<std::string>());
  }
  t.timestamp = j.at("timestamp").get<std::int64_t>();
  t.content_keys = j.value("content_keys", std::vector<std::string>{});
  if (j.contains("topic") && !j["topic"].is_null()) t.topic = j["topic"].get<std::string>();
  if (j.contains("offer") && !j["offer"].is_null()) {
    const auto& o = j["offer"];
    t.offer = Offer{o.at("kind").get<std::string>(), o.at("key").get<std::string>(),
                    o.value("text", std::string{})};
  }
  t.executed_offer = j.value("executed_offer", false);
  if (j.contains("features")) t.features = j["features"].get<std::map<std::string, double>>();
  if (j.contains("rating") && !j["rating"].is_null()) t.rating = j["rating"].get<double>();
  return t;
}

inline std::vector<TurnRecord> parse_transcript(std::istream& in, const std::string& origin) {
  std::vector<TurnRecord> turns;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    try {
      turns.push_back(turn_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(origin, number, e.what());
    } catch (const Error& e) {
      throw ParseError(origin, number, e.what());
    }
  }
  return turns;
}

inline std::vector<TurnRecord> load_transcript(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open transcript: " + path);
  return parse_transcript(in, path);
}

inline DiscourseState replay(const std::vector<TurnRecord>& turns, const KnowledgeBase& kb) {
  DiscourseState state;
  for (const auto& t : turns) update_state(state, t, kb);
  return state;
}

}  // namespace relchat
