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

// Mixed-initiative policy: rule-based user act classification, a fixed
// act -> decision table, and candidate gathering from every generator plus
// direct question answering over both the KB and the search index.

#include <algorithm>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relchat/acts.hpp"
#include "relchat/discourse.hpp"
#include "relchat/error.hpp"
#include "relchat/kb.hpp"
#include "relchat/nlg.hpp"
#include "relchat/ranker.hpp"
#include "relchat/relations.hpp"
#include "relchat/search.hpp"
#include "relchat/text.hpp"

namespace relchat {

// ---- user act classification ------------------------------------------------

namespace detail {

inline const WordSet& wh_words() {
  static const WordSet k = {"what", "who", "whom", "whose", "which", "where", "when", "how"};
  return k;
}
inline const WordSet& auxiliaries() {
  static const WordSet k = {"do",   "does",  "did",    "is",    "are",  "was", "were",
                            "can",  "could", "will",   "would", "have", "has", "had",
                            "should", "shall", "may", "might", "am"};
  return k;
}
inline const WordSet& subjects() {
  static const WordSet k = {"you",  "i",  "it",   "he",   "she", "they", "we", "there",
                            "that", "this", "the", "a",   "an",  "your", "my", "any"};
  return k;
}
inline const WordSet& discourse_markers() {
  static const WordSet k = {"so", "and", "but", "okay", "ok", "well", "oh", "then", "hmm", "um"};
  return k;
}
inline const WordSet& assent_core() {
  static const WordSet k = {"sure", "yes", "yep", "yeah", "absolutely", "same", "okay",
                            "ok",   "definitely", "alright", "certainly", "yup"};
  return k;
}
inline const WordSet& assent_filler() {
  static const WordSet k = {"please", "thing", "of", "course", "go", "ahead", "oh", "me", "too", "why", "not"};
  return k;
}
inline const WordSet& dissent_core() {
  static const WordSet k = {"no", "nope", "nah", "not"};
  return k;
}
inline const WordSet& dissent_filler() {
  static const WordSet k = {"thanks", "thank", "you", "really", "never", "mind", "way", "at", "all", "interested", "now", "please"};
  return k;
}
inline const WordSet& evaluative_verbs() {
  static const WordSet k = {"like",   "love",   "hate",  "think", "prefer", "enjoy", "adore",
                            "dislike", "liked", "loved", "hated", "thought", "enjoyed"};
  return k;
}

// Tokenized clauses split at . , ; ! ? with leading discourse markers removed.
inline std::vector<std::vector<std::string>> clauses(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  std::string cur;
  auto flush = [&] {
    auto toks = tokenize(cur);
    std::size_t skip = 0;
    while (skip < toks.size() && discourse_markers().count(toks[skip])) ++skip;
    toks.erase(toks.begin(), toks.begin() + static_cast<std::ptrdiff_t>(skip));
    if (!toks.empty()) out.push_back(std::move(toks));
    cur.clear();
  };
  for (char c : text) {
    if (c == '.' || c == ',' || c == ';' || c == '!' || c == '?') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

inline bool all_in(const std::vector<std::string>& toks, const WordSet& core, const WordSet& filler) {
  bool has_core = false;
  for (const auto& t : toks) {
    if (core.count(t)) {
      has_core = true;
    } else if (!filler.count(t)) {
      return false;
    }
  }
  return has_core;
}

}  // namespace detail

// Ordered pattern rules; the first rule that fires wins.
inline DialogueAct classify_user_act(std::string_view text, const DiscourseState& /*state*/) {
  auto toks = tokenize(text);
  bool question_mark = text.find('?') != std::string_view::npos;
  auto cls = detail::clauses(text);
  auto has = [&](std::string_view w) { return std::find(toks.begin(), toks.end(), w) != toks.end(); };

  for (const auto& c : cls) {
    if (c.front() == "why") return DialogueAct::WHY_QUESTION;
  }
  if (has("why") && question_mark) return DialogueAct::WHY_QUESTION;

  for (const auto& c : cls) {
    if (detail::wh_words().count(c.front())) return DialogueAct::WH_QUESTION;
  }
  if (question_mark && std::any_of(toks.begin(), toks.end(),
                                   [](const std::string& t) { return detail::wh_words().count(t) > 0; })) {
    return DialogueAct::WH_QUESTION;
  }

  for (const auto& c : cls) {
    if (!detail::auxiliaries().count(c.front())) continue;
    if (question_mark || (c.size() > 1 && detail::subjects().count(c[1]))) {
      return DialogueAct::YN_QUESTION;
    }
  }

  std::string norm = " " + normalize(text) + " ";
  if (norm.find(" talk about ") != std::string::npos || norm.find(" chat about ") != std::string::npos ||
      norm.find(" lets discuss ") != std::string::npos) {
    return DialogueAct::TOPIC_PROPOSAL;
  }

  if (!toks.empty() && detail::all_in(toks, detail::assent_core(), detail::assent_filler())) {
    return DialogueAct::AGREEMENT;
  }
  if (!toks.empty() && detail::all_in(toks, detail::dissent_core(), detail::dissent_filler())) {
    return DialogueAct::REJECTION;
  }

  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i] == "i") {
      for (std::size_t k = i + 1; k < toks.size() && k <= i + 3; ++k) {
        if (detail::evaluative_verbs().count(toks[k])) return DialogueAct::STATEMENT_OPINION;
      }
    }
    if (toks[i] == "my" && i + 1 < toks.size() && toks[i + 1] == "favorite") {
      return DialogueAct::STATEMENT_OPINION;
    }
  }
  return DialogueAct::STATEMENT;
}

// ---- topics and question keywords -------------------------------------------

struct Topic {
  std::string key;
  std::string bin;
  std::string display;   // plural noun phrase, e.g. "movies"
  std::string question;  // follow-up question asked after the topic opinion
  std::vector<std::string> aliases;
};

class TopicTable {
 public:
  TopicTable() = default;
  explicit TopicTable(std::vector<Topic> topics) : topics_(std::move(topics)) {}

  static TopicTable from_json(const nlohmann::json& j) {
    std::vector<Topic> topics;
    for (const auto& [key, t] : j.items()) {
      Topic topic;
      topic.key = key;
      topic.bin = t.value("bin", key);
      topic.display = t.value("display", key);
      topic.question = t.value("question", std::string{});
      topic.aliases = t.value("aliases", std::vector<std::string>{});
      topic.aliases.push_back(key);
      topics.push_back(std::move(topic));
    }
    return TopicTable(std::move(topics));
  }

  const Topic* find(const std::string& key) const {
    for (const auto& t : topics_) {
      if (t.key == key) return &t;
    }
    return nullptr;
  }

  // Topic whose alias appears in the text. The longest alias wins, then the
  // one appearing last ("movies about aliens" is about aliens).
  const Topic* match(std::string_view text) const {
    std::string norm = " " + normalize(text) + " ";
    const Topic* best = nullptr;
    std::size_t best_len = 0;
    std::size_t best_pos = 0;
    for (const auto& t : topics_) {
      for (const auto& alias : t.aliases) {
        std::string a = normalize(alias);
        if (a.empty()) continue;
        auto pos = norm.rfind(" " + a + " ");
        if (pos == std::string::npos) continue;
        if (a.size() > best_len || (a.size() == best_len && pos > best_pos)) {
          best = &t;
          best_len = a.size();
          best_pos = pos;
        }
      }
    }
    return best;
  }

  const std::vector<Topic>& topics() const { return topics_; }

 private:
  std::vector<Topic> topics_;
};

// Text following "talk about" / "chat about" / "discuss".
inline std::string topic_phrase(std::string_view text) {
  std::string norm = normalize(text);
  for (std::string_view cue : {"talk about ", "chat about ", "discuss "}) {
    auto pos = norm.find(cue);
    if (pos != std::string::npos) return norm.substr(pos + cue.size());
  }
  return norm;
}

// Keyword -> attribute (or relation) name. Matching is on normalized token
// boundaries; the longest keyword wins, then the earliest.
class AttributeKeywordMap {
 public:
  AttributeKeywordMap() = default;

  static AttributeKeywordMap from_json(const nlohmann::json& j) {
    AttributeKeywordMap m;
    for (const auto& [keyword, attribute] : j.items()) {
      m.entries_.emplace_back(normalize(keyword), attribute.get<std::string>());
    }
    return m;
  }

  std::optional<std::string> match(std::string_view text) const {
    std::string norm = " " + normalize(text) + " ";
    std::optional<std::string> best;
    std::size_t best_len = 0;
    std::size_t best_pos = std::string::npos;
    for (const auto& [keyword, attribute] : entries_) {
      auto pos = norm.find(" " + keyword + " ");
      if (pos == std::string::npos) continue;
      if (keyword.size() > best_len || (keyword.size() == best_len && pos < best_pos)) {
        best = attribute;
        best_len = keyword.size();
        best_pos = pos;
      }
    }
    return best;
  }

  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

inline AttributeKeywordMap load_attribute_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open attribute map: " + path);
  try {
    return AttributeKeywordMap::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, e.what());
  }
}

// Immutable data every session reads.
struct Fixtures {
  KnowledgeBase kb;
  Index index;
  TemplateSet templates;
  std::vector<OpinionEntry> opinions;
  std::vector<Story> stories;
  SentimentLexicon lexicon;
  WordSet stopwords;
  TopicTable topics;
  AttributeKeywordMap attribute_map;
  Weights weights = Weights::defaults();

  GeneratorContext generator_context() const { return {kb, index, templates, lexicon, stopwords}; }
  FeatureContext feature_context() const { return {kb, stopwords}; }
};

// ---- decisions ----------------------------------------------------------------

inline PolicyDecision select_system_act(DialogueAct user_act, const DiscourseState& state) {
  using R = DiscourseRelation;
  PolicyDecision d;
  switch (user_act) {
    case DialogueAct::WH_QUESTION:
    case DialogueAct::YN_QUESTION:
    case DialogueAct::OPEN_QUESTION:
      d.system_act = DialogueAct::ANSWER;
      d.preferred_relations = {R::EXPANSION};
      d.must_answer = true;
      return d;
    case DialogueAct::WHY_QUESTION:
      d.system_act = DialogueAct::ANSWER;
      d.preferred_relations = {R::CONTINGENCY};
      d.must_answer = true;
      return d;
    case DialogueAct::TOPIC_PROPOSAL:
      d.system_act = DialogueAct::STATEMENT_OPINION;
      d.preferred_relations = {R::EXPANSION, R::CONTINGENCY};
      d.follow_up_question = true;
      return d;
    case DialogueAct::AGREEMENT:
      d.system_act = DialogueAct::STATEMENT;
      if (state.pending_offer) {
        d.preferred_relations = {R::TEMPORAL};
        d.execute_offer = true;
      } else {
        // A bare back-channel hands the initiative to the system.
        d.preferred_relations = {R::TEMPORAL, R::CONTINGENCY, R::COMPARISON};
      }
      return d;
    default:
      break;
  }
  d.system_act = DialogueAct::STATEMENT;
  d.preferred_relations = {R::EXPANSION, R::CONTINGENCY, R::COMPARISON, R::TEMPORAL};
  return d;
}

// What the gatherer knows about the user's turn.
struct TurnContext {
  std::string user_text;
  DialogueAct user_act = DialogueAct::STATEMENT;
  std::vector<std::string> user_entities;  // referenced in this turn, in order
  const Topic* topic = nullptr;            // session topic after this turn
};

namespace detail {

inline Candidate as_answer(RelationCandidate c) {
  c.dialogue_act = DialogueAct::ANSWER;
  return Candidate(std::move(c));
}

// Most recent system opinion key "opinion:<slug>" in the history.
inline std::optional<std::string> last_opinion_key(const DiscourseState& state) {
  for (auto it = state.turns.rbegin(); it != state.turns.rend(); ++it) {
    for (const auto& key : it->content_keys) {
      if (key.rfind("opinion:", 0) == 0 && std::count(key.begin(), key.end(), ':') == 1) return key;
    }
  }
  return std::nullopt;
}

inline constexpr std::size_t kMaxListed = 3;

inline std::string join_list(const std::vector<std::string>& items) {
  if (items.size() <= 1) return items.empty() ? std::string{} : items.front();
  std::vector<std::string> head(items.begin(), items.end() - 1);
  return join(head, ", ") + " and " + items.back();
}

// One statement naming every unused target of the asked relation.
inline std::optional<RelationCandidate> list_answer(const Entity& e, const std::vector<Related>& related,
                                                    const DiscourseState& state,
                                                    const GeneratorContext& ctx) {
  std::vector<const Entity*> targets;
  for (const auto& rel : related) {
    if (targets.size() == kMaxListed) break;
    if (!state.content_ledger.count(edge_key(ctx.kb, e.id, rel.relation, rel.entity->id))) {
      targets.push_back(rel.entity);
    }
  }
  if (targets.empty()) return std::nullopt;
  const std::string& relation = related.front().relation;
  std::vector<std::string> names;
  RelationCandidate c;
  c.relation = DiscourseRelation::EXPANSION;
  c.source = ContentSource::structured;
  c.focus_entity = e.id;
  for (const Entity* t : targets) {
    names.push_back(t->name);
    c.mentions.push_back(t->id);
    std::string key = edge_key(ctx.kb, e.id, relation, t->id);
    if (c.content_key.empty()) {
      c.content_key = key;
    } else {
      c.extra_keys.push_back(key);
    }
  }
  c.mentions.push_back(e.id);
  const Template& t = template_or(ctx.templates, "rel." + relation, "rel.generic");
  c.text = realize_template(t, {{"subject", e.name},
                                {"object", join_list(names)},
                                {"relation", display_attribute(relation)}});
  return c;
}

inline std::optional<Candidate> search_answer(const TurnContext& turn, const DiscourseState& state,
                                              const Fixtures& fx,
                                              const std::optional<std::string>& subject) {
  std::optional<std::string> focal_name;
  if (!turn.user_entities.empty()) focal_name = fx.kb.at(turn.user_entities.front()).name;
  std::string q = make_query(focal_name, turn.user_text, fx.stopwords);
  if (q.empty() || fx.index.size() == 0) return std::nullopt;
  for (const auto& hit : fx.index.query(q, 3)) {
    const Document* doc = fx.index.find(hit.doc_id);
    bool own = doc && subject && doc->linked_entity == subject;
    ExtractMode mode = own ? ExtractMode::first_sentence : ExtractMode::best_two;
    std::size_t idx = own ? 0 : hit.sentence_index;
    std::string key = "doc:" + hit.doc_id + ":s" + std::to_string(idx);
    if (state.content_ledger.count(key)) continue;
    RelationCandidate c;
    c.relation = DiscourseRelation::EXPANSION;
    c.source = ContentSource::search;
    c.content_key = key;
    c.text = package_extract(hit, fx.index, mode);
    if (doc && doc->linked_entity && fx.kb.find(*doc->linked_entity)) {
      c.focus_entity = doc->linked_entity;
    }
    c.mentions = mention_ids(find_mentions(c.text, state, fx.kb, fx.stopwords, false));
    if (c.focus_entity) {
      std::erase(c.mentions, *c.focus_entity);
      c.mentions.push_back(*c.focus_entity);
    }
    return as_answer(std::move(c));
  }
  return std::nullopt;
}

inline void add_opinion_answer(std::vector<Candidate>& pool, const DiscourseState& state,
                               const Fixtures& fx, const OpinionTarget& target) {
  try {
    auto pair = instantiate_contingency(state, fx.opinions, target, fx.generator_context());
    if (pair.opinion) {
      pool.push_back(as_answer(std::move(*pair.opinion)));
    } else if (pair.justification) {
      pool.push_back(as_answer(std::move(*pair.justification)));
    }
  } catch (const NoOpinion&) {
  }
}

inline void gather_answers(std::vector<Candidate>& pool, const PolicyDecision& decision,
                           const TurnContext& turn, const DiscourseState& state, const Fixtures& fx) {
  std::optional<std::string> subject;
  if (!turn.user_entities.empty()) {
    subject = turn.user_entities.front();
  } else if (state.focus()) {
    subject = state.focus()->entity_id;
  }
  std::optional<std::string> bin;
  if (turn.topic) bin = turn.topic->bin;

  if (turn.user_act == DialogueAct::WHY_QUESTION) {
    OpinionTarget target;
    if (auto key = last_opinion_key(state)) {
      for (const auto& e : fx.opinions) {
        if (opinion_key(e) == *key) target.surface = e.entity;
      }
    }
    if (!target.surface) {
      target.entity_id = subject;
      target.bin = bin;
    }
    try {
      auto pair = instantiate_contingency(state, fx.opinions, target, fx.generator_context());
      if (pair.justification) {
        pool.push_back(as_answer(std::move(*pair.justification)));
      } else if (pair.opinion) {
        pool.push_back(as_answer(std::move(*pair.opinion)));
      }
    } catch (const NoOpinion&) {
    }
    return;
  }

  auto attribute = fx.attribute_map.match(turn.user_text);
  if (attribute && *attribute == "opinion") {
    add_opinion_answer(pool, state, fx, OpinionTarget{subject, std::nullopt, bin});
    return;
  }
  // "your favorite" asks for the system's own pick within the topic.
  if (attribute && *attribute == "favorite") {
    if (bin) {
      add_opinion_answer(pool, state, fx, OpinionTarget{std::nullopt, std::nullopt, bin});
    } else {
      add_opinion_answer(pool, state, fx, OpinionTarget{subject, std::nullopt, std::nullopt});
    }
    return;
  }

  auto ctx = fx.generator_context();
  if (attribute && subject) {
    const Entity& e = fx.kb.at(*subject);
    auto related = fx.kb.related(e.id, *attribute);
    if (!related.empty()) {
      if (auto c = list_answer(e, related, state, ctx)) pool.push_back(as_answer(std::move(*c)));
    } else if (!state.content_ledger.count(fact_key(e.id, *attribute))) {
      if (auto c = attribute_candidate(e, *attribute, ctx)) pool.push_back(as_answer(std::move(*c)));
    }
  }
  (void)decision;
  if (auto c = search_answer(turn, state, fx, subject)) pool.push_back(std::move(*c));
}

inline std::optional<Candidate> story_offer(const DiscourseState& state, const Fixtures& fx,
                                            const Topic& topic) {
  for (const auto& s : fx.stories) {
    if (normalize(s.bin) != normalize(topic.bin)) continue;
    std::string key = "offer:story:" + s.story_id;
    if (state.content_ledger.count(key) || state.content_ledger.count(story_key(s.story_id, 0))) {
      continue;
    }
    RelationCandidate c;
    c.relation = DiscourseRelation::TEMPORAL;
    c.dialogue_act = DialogueAct::OFFER;
    c.source = ContentSource::template_;
    c.content_key = key;
    c.text = realize_template(fx.templates.at("offer.story"), {{"topic", topic.display}});
    c.offer = Offer{"story", s.story_id, c.text};
    return Candidate(std::move(c));
  }
  return std::nullopt;
}

}  // namespace detail

// Collects candidates for the decision. Questions pool a structured lookup
// and a search answer; otherwise every preferred relation's generator
// contributes. Nothing whose content key is in the ledger is returned.
inline std::vector<Candidate> gather_candidates(const PolicyDecision& decision, const TurnContext& turn,
                                                const DiscourseState& state, const Fixtures& fx) {
  std::vector<Candidate> pool;
  auto ctx = fx.generator_context();

  if (decision.must_answer) {
    detail::gather_answers(pool, decision, turn, state, fx);
  } else {
    if (decision.execute_offer && state.pending_offer && state.pending_offer->kind == "story") {
      if (const Story* s = find_story(fx.stories, state.pending_offer->key)) {
        if (!state.content_ledger.count(story_key(s->story_id, 0))) {
          Candidate c(story_candidate(*s, 0));
          c.executes_offer = true;
          pool.push_back(std::move(c));
          return pool;
        }
      }
    }

    bool topic_opinion = false;
    if (decision.follow_up_question && turn.topic) {
      std::string key = "topic:" + turn.topic->key;
      if (!state.content_ledger.count(key)) {
        RelationCandidate c;
        c.relation = DiscourseRelation::CONTINGENCY;
        c.dialogue_act = DialogueAct::STATEMENT_OPINION;
        c.source = ContentSource::template_;
        c.content_key = key;
        c.text = realize_template(fx.templates.at("topic.opinion"), {{"topic", turn.topic->display}});
        if (!turn.topic->question.empty()) c.follow_up = turn.topic->question;
        pool.emplace_back(std::move(c));
        topic_opinion = true;
      }
    }

    for (DiscourseRelation rel : decision.preferred_relations) {
      switch (rel) {
        case DiscourseRelation::EXPANSION:
          try {
            for (auto& c : instantiate_expansion(state, ctx)) pool.emplace_back(std::move(c));
          } catch (const NoFocusEntity&) {
          }
          break;
        case DiscourseRelation::CONTINGENCY: {
          if (topic_opinion) break;
          OpinionTarget target;
          if (state.focus()) target.entity_id = state.focus()->entity_id;
          if (turn.topic) target.bin = turn.topic->bin;
          if (!target.entity_id && !target.bin) break;
          try {
            auto pair = instantiate_contingency(state, fx.opinions, target, ctx);
            if (pair.opinion) {
              pool.emplace_back(std::move(*pair.opinion));
            } else if (pair.justification) {
              pool.emplace_back(std::move(*pair.justification));
            }
          } catch (const NoOpinion&) {
          }
          break;
        }
        case DiscourseRelation::COMPARISON:
          if (auto c = instantiate_comparison(state, ctx)) pool.emplace_back(std::move(*c));
          break;
        case DiscourseRelation::TEMPORAL: {
          bool continued = false;
          if (state.story_cursor) {
            const Story* s = find_story(fx.stories, state.story_cursor->story_id);
            if (s) {
              auto r = instantiate_temporal(state, fx.stories, s->bin);
              if (auto* c = std::get_if<RelationCandidate>(&r)) {
                pool.emplace_back(std::move(*c));
                continued = true;
              }
            }
          }
          if (!continued && turn.topic) {
            if (auto c = detail::story_offer(state, fx, *turn.topic)) pool.push_back(std::move(*c));
          }
          break;
        }
      }
    }
  }

  std::erase_if(pool, [&](const Candidate& c) {
    if (!c.content_key.empty() && state.content_ledger.count(c.content_key)) return true;
    return std::any_of(c.extra_keys.begin(), c.extra_keys.end(),
                       [&](const std::string& k) { return state.content_ledger.count(k) > 0; });
  });
  return pool;
}

}  // namespace relchat
