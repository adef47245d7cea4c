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

// Candidate generators, one per discourse relation:
//   EXPANSION    facts and related entities around the focus (KB, search fallback)
//   CONTINGENCY  opinion + justification pairs from the opinion table
//   TEMPORAL     story sentences in source order
//   COMPARISON   attribute contrast between two salient same-type entities
// Generators are pure: they read the state and never return content whose key
// is already in the session ledger.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "relchat/acts.hpp"
#include "relchat/discourse.hpp"
#include "relchat/error.hpp"
#include "relchat/kb.hpp"
#include "relchat/nlg.hpp"
#include "relchat/search.hpp"
#include "relchat/text.hpp"

namespace relchat {

struct OpinionEntry {
  std::string entity;
  std::string bin;
  int sentiment = 3;
  std::vector<std::string> justifications;
};

struct Story {
  std::string story_id;
  std::string bin;
  std::vector<std::string> sentences;
};

struct RelationCandidate {
  DiscourseRelation relation = DiscourseRelation::EXPANSION;
  DialogueAct dialogue_act = DialogueAct::STATEMENT;
  std::string text;
  ContentSource source = ContentSource::structured;
  std::string content_key;
  std::optional<std::string> focus_entity;
  std::optional<std::string> follow_up;

  // Entities the utterance mentions; the focus is listed last so it ends up
  // at the head of the salience list.
  std::vector<std::string> mentions;
  std::optional<Offer> offer;
  bool executes_offer = false;
  // Further content keys consumed by the same utterance (list answers).
  std::vector<std::string> extra_keys;

  std::string utterance() const { return follow_up ? text + " " + *follow_up : text; }
};

// Integer sentiment 1..5 to an evaluative phrase.
struct SentimentLexicon {
  std::array<std::string, 5> words = {"terrible", "not so great", "okay", "pretty good", "awesome"};

  const std::string& word(int sentiment) const {
    if (sentiment < 1 || sentiment > 5) throw SentimentRange("sentiment outside 1..5");
    return words[static_cast<std::size_t>(sentiment - 1)];
  }

  static SentimentLexicon from_json(const nlohmann::json& j) {
    SentimentLexicon lex;
    for (int s = 1; s <= 5; ++s) {
      auto key = std::to_string(s);
      if (j.contains(key)) lex.words[static_cast<std::size_t>(s - 1)] = j[key].get<std::string>();
    }
    return lex;
  }
};

// Everything a generator may read besides the session state.
struct GeneratorContext {
  const KnowledgeBase& kb;
  const Index& index;
  const TemplateSet& templates;
  const SentimentLexicon& lexicon;
  const WordSet& stopwords;
};

// ---- fixture loading --------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace detail

// CSV with header entity,bin,sentiment,justifications; justifications are
// ';'-separated.
inline std::vector<OpinionEntry> parse_opinions(std::istream& in, const std::string& origin) {
  std::vector<OpinionEntry> out;
  std::string line;
  std::size_t number = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (header) {
      header = false;
      if (fields.size() != 4 || normalize(fields[0]) != "entity" || normalize(fields[2]) != "sentiment") {
        throw ParseError(origin, number, "expected header entity,bin,sentiment,justifications");
      }
      continue;
    }
    if (fields.size() != 4) throw ParseError(origin, number, "expected 4 fields");
    OpinionEntry e;
    e.entity = trim(fields[0]);
    e.bin = trim(fields[1]);
    std::string s = trim(fields[2]);
    int value = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ParseError(origin, number, "sentiment must be an integer");
    }
    if (value < 1 || value > 5) {
      throw SentimentRange(origin + ":" + std::to_string(number) + ": sentiment " + s +
                           " outside 1..5");
    }
    e.sentiment = value;
    std::string rest = fields[3];
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      auto semi = rest.find(';', pos);
      std::string j = trim(rest.substr(pos, semi == std::string::npos ? std::string::npos : semi - pos));
      if (!j.empty()) e.justifications.push_back(j);
      if (semi == std::string::npos) break;
      pos = semi + 1;
    }
    if (e.entity.empty() || e.justifications.empty()) {
      throw ParseError(origin, number, "entity and at least one justification required");
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<OpinionEntry> load_opinions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open opinions: " + path);
  return parse_opinions(in, path);
}

inline std::vector<Story> parse_stories(std::istream& in, const std::string& origin) {
  std::vector<Story> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Story s;
      s.story_id = j.at("story_id").get<std::string>();
      s.bin = j.at("bin").get<std::string>();
      s.sentences = j.at("sentences").get<std::vector<std::string>>();
      if (s.sentences.empty()) throw ParseError(origin, number, "story without sentences");
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(origin, number, e.what());
    }
  }
  return out;
}

inline std::vector<Story> load_stories(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open stories: " + path);
  return parse_stories(in, path);
}

// ---- shared realization helpers ---------------------------------------------

// Template `id` when present, else `fallback`.
inline const Template& template_or(const TemplateSet& templates, const std::string& id,
                                   const std::string& fallback) {
  if (const Template* t = templates.find(id)) return *t;
  return templates.at(fallback);
}

inline std::string most_specific_type(const Entity& e) { return type_words(e.type_path.front()); }

inline Slots fact_slots(const Entity& e, const std::string& attribute, const AttributeValue& v,
                        const SentimentLexicon& lexicon) {
  Slots slots{{"subject", e.name},
              {"attribute", display_attribute(attribute)},
              {"value", v.text()},
              {"type", most_specific_type(e)}};
  if (auto n = v.number(); n && *n >= 1 && *n <= 5 && *n == std::floor(*n)) {
    slots["sentiment"] = lexicon.word(static_cast<int>(*n));
  }
  return slots;
}

inline std::string fact_key(const std::string& id, const std::string& attribute) {
  return "fact:" + id + ":" + attribute;
}

// An edge and its inverse state the same fact, so both directions share the
// lexicographically smaller of the two keys.
inline std::string edge_key(const KnowledgeBase& kb, const std::string& id, const std::string& relation,
                            const std::string& target) {
  std::string forward = "edge:" + id + ":" + relation + ":" + target;
  std::string backward = "edge:" + target + ":" + kb.inverse(relation) + ":" + id;
  return std::min(forward, backward);
}

// Statement of one attribute of `e`; std::nullopt when the attribute is
// bookkeeping (gender, plural) or the template cannot be filled.
inline std::optional<RelationCandidate> attribute_candidate(const Entity& e,
                                                            const std::string& attribute,
                                                            const GeneratorContext& ctx) {
  if (attribute == "gender" || attribute == "plural") return std::nullopt;
  RelationCandidate c;
  c.relation = DiscourseRelation::EXPANSION;
  c.source = ContentSource::structured;
  c.focus_entity = e.id;
  c.mentions = {e.id};
  c.content_key = fact_key(e.id, attribute);
  try {
    if (attribute == "description") {
      if (e.description.empty()) return std::nullopt;
      c.text = realize_template(ctx.templates.at("fact.description"),
                                {{"subject", e.name}, {"value", e.description}});
    } else {
      auto it = e.attributes.find(attribute);
      if (it == e.attributes.end()) return std::nullopt;
      const Template& t = template_or(ctx.templates, "fact." + attribute, "fact.generic");
      c.text = realize_template(t, fact_slots(e, attribute, it->second, ctx.lexicon));
      c.dialogue_act = t.dialogue_act;
    }
  } catch (const MissingSlot&) {
    return std::nullopt;
  }
  return c;
}

// Statement of one edge from `e` to `target`.
inline RelationCandidate edge_candidate(const Entity& e, const std::string& relation,
                                        const Entity& target, const GeneratorContext& ctx) {
  RelationCandidate c;
  c.relation = DiscourseRelation::EXPANSION;
  c.source = ContentSource::structured;
  c.focus_entity = e.id;
  c.mentions = {target.id, e.id};
  c.content_key = edge_key(ctx.kb, e.id, relation, target.id);
  const Template& t = template_or(ctx.templates, "rel." + relation, "rel.generic");
  c.text = realize_template(t, {{"subject", e.name},
                                {"object", target.name},
                                {"relation", display_attribute(relation)}});
  c.dialogue_act = t.dialogue_act;
  return c;
}

// ---- EXPANSION ----------------------------------------------------------------

inline const Entity& focal_entity(const DiscourseState& state, const KnowledgeBase& kb) {
  const SalienceEntry* head = state.focus();
  if (!head) throw NoFocusEntity("no salient entity");
  const Entity* e = kb.find(head->entity_id);
  if (!e) throw NoFocusEntity("focus " + head->entity_id + " not in knowledge base");
  return *e;
}

// Statements about the focus itself while any remain; after that, statement
// and follow-up-question candidates for every related entity. When the KB
// offers nothing unused, sentences from documents linked to the focus are
// used instead.
inline std::vector<RelationCandidate> instantiate_expansion(const DiscourseState& state,
                                                            const GeneratorContext& ctx) {
  const Entity& focus = focal_entity(state, ctx.kb);
  const auto& ledger = state.content_ledger;
  std::vector<RelationCandidate> out;

  std::vector<std::string> attributes{"description"};
  for (const auto& [name, _] : focus.attributes) attributes.push_back(name);
  for (const auto& attr : attributes) {
    if (ledger.count(fact_key(focus.id, attr))) continue;
    if (auto c = attribute_candidate(focus, attr, ctx)) out.push_back(std::move(*c));
  }

  if (!out.empty()) return out;

  for (const auto& rel : ctx.kb.related(focus.id)) {
    if (ledger.count(edge_key(ctx.kb, focus.id, rel.relation, rel.entity->id))) continue;
    RelationCandidate statement = edge_candidate(focus, rel.relation, *rel.entity, ctx);
    RelationCandidate question = statement;
    const Template& ask = template_or(ctx.templates, "followup." + rel.entity->type_path.front(),
                                      "followup.generic");
    question.follow_up = realize_template(ask, {{"object", rel.entity->name}});
    question.dialogue_act = ask.dialogue_act;
    out.push_back(std::move(statement));
    out.push_back(std::move(question));
  }

  if (out.empty() && ctx.index.size() > 0) {
    for (const auto& hit : ctx.index.query(focus.name, 5)) {
      const Document* doc = ctx.index.find(hit.doc_id);
      if (!doc || doc->linked_entity != focus.id) continue;
      auto sentences = sentences_of(doc->body);
      for (std::size_t i = 0; i < sentences.size(); ++i) {
        std::string key = "doc:" + doc->doc_id + ":s" + std::to_string(i);
        if (ledger.count(key)) continue;
        RelationCandidate c;
        c.relation = DiscourseRelation::EXPANSION;
        c.source = ContentSource::search;
        c.focus_entity = focus.id;
        c.mentions = {focus.id};
        c.content_key = key;
        c.text = collapse_whitespace(sentences[i]);
        out.push_back(std::move(c));
        break;
      }
    }
  }
  return out;
}

// ---- CONTINGENCY ----------------------------------------------------------------

struct OpinionTarget {
  std::optional<std::string> entity_id;
  std::optional<std::string> surface;
  std::optional<std::string> bin;
};

struct ContingencyPair {
  std::optional<RelationCandidate> opinion;
  std::optional<RelationCandidate> justification;
  const OpinionEntry* entry = nullptr;
};

inline std::string opinion_slug(const OpinionEntry& e) {
  std::string n = normalize(e.entity);
  std::replace(n.begin(), n.end(), ' ', '_');
  return n;
}

inline std::string opinion_key(const OpinionEntry& e) { return "opinion:" + opinion_slug(e); }

inline std::string justification_key(const OpinionEntry& e, std::size_t j) {
  return opinion_key(e) + ":" + std::to_string(j);
}

inline bool opinion_matches_entity(const OpinionEntry& entry, const Entity& e) {
  if (entry.entity == e.id) return true;
  std::string n = normalize(entry.entity);
  for (const auto& alias : e.aliases) {
    if (normalize(alias) == n) return true;
  }
  return false;
}

// Builds the opinion / justification pair for the first matching entry that
// still has unused content. Entity matches are tried before bin matches, and
// bin matches go from the highest sentiment down.
// Either side is empty when its content key is already in the ledger.
inline ContingencyPair instantiate_contingency(const DiscourseState& state,
                                               const std::vector<OpinionEntry>& opinions,
                                               const OpinionTarget& target,
                                               const GeneratorContext& ctx) {
  const Entity* target_entity = target.entity_id ? ctx.kb.find(*target.entity_id) : nullptr;
  std::vector<const OpinionEntry*> matches;
  auto add = [&](const OpinionEntry& e) {
    if (std::find(matches.begin(), matches.end(), &e) == matches.end()) matches.push_back(&e);
  };
  for (const auto& e : opinions) {
    if ((target_entity && opinion_matches_entity(e, *target_entity)) ||
        (target.entity_id && e.entity == *target.entity_id) ||
        (target.surface && normalize(e.entity) == normalize(*target.surface))) {
      add(e);
    }
  }
  if (target.bin) {
    std::vector<const OpinionEntry*> in_bin;
    for (const auto& e : opinions) {
      if (normalize(e.bin) == normalize(*target.bin)) in_bin.push_back(&e);
    }
    std::stable_sort(in_bin.begin(), in_bin.end(), [](const OpinionEntry* a, const OpinionEntry* b) {
      return a->sentiment > b->sentiment;
    });
    for (const OpinionEntry* e : in_bin) add(*e);
  }
  if (matches.empty()) throw NoOpinion("no opinion matches the target");

  const auto& ledger = state.content_ledger;
  for (const OpinionEntry* entry : matches) {
    ContingencyPair pair;
    pair.entry = entry;
    std::optional<std::string> entity_id;
    if (auto linked = ctx.kb.ids_for_alias(normalize(entry->entity)); !linked.empty()) {
      entity_id = linked.front();
    }
    const Entity* entity = entity_id ? ctx.kb.find(*entity_id) : nullptr;
    const std::string& name = entity ? entity->name : entry->entity;
    const std::string& sentiment = ctx.lexicon.word(entry->sentiment);

    auto base = [&](const std::string& key) {
      RelationCandidate c;
      c.relation = DiscourseRelation::CONTINGENCY;
      c.source = ContentSource::structured;
      c.content_key = key;
      c.focus_entity = entity_id;
      if (entity_id) c.mentions = {*entity_id};
      return c;
    };

    if (!ledger.count(opinion_key(*entry))) {
      RelationCandidate c = base(opinion_key(*entry));
      auto framings = ctx.templates.family("opinion.");
      const Template& t = framings.empty()
                              ? ctx.templates.at("opinion")
                              : *framings[stable_hash(c.content_key) % framings.size()];
      c.text = realize_template(t, {{"entity", name}, {"sentiment", sentiment}});
      c.dialogue_act = DialogueAct::STATEMENT_OPINION;
      pair.opinion = std::move(c);
    }
    for (std::size_t j = 0; j < entry->justifications.size(); ++j) {
      std::string key = justification_key(*entry, j);
      if (ledger.count(key)) continue;
      RelationCandidate c = base(key);
      std::string subject = name;
      if (entity) {
        std::string p = subject_pronoun(*entity, ctx.kb);
        if (!p.empty()) subject = p;
      }
      std::string why = entry->justifications[j];
      while (!why.empty() && (why.back() == '.' || why.back() == '!')) why.pop_back();
      c.text = realize_template(ctx.templates.at("justification"),
                                {{"subject", subject}, {"sentiment", sentiment}, {"justification", why}});
      c.dialogue_act = DialogueAct::STATEMENT;
      pair.justification = std::move(c);
      break;
    }
    if (pair.opinion || pair.justification) return pair;
  }
  return ContingencyPair{};
}

// ---- TEMPORAL -------------------------------------------------------------------

struct Exhausted {};

using TemporalResult = std::variant<RelationCandidate, Exhausted>;

inline RelationCandidate story_candidate(const Story& story, std::size_t sentence) {
  RelationCandidate c;
  c.relation = DiscourseRelation::TEMPORAL;
  c.dialogue_act = DialogueAct::STATEMENT;
  c.source = ContentSource::template_;
  c.content_key = story_key(story.story_id, sentence);
  c.text = story.sentences[sentence];
  return c;
}

inline const Story* find_story(const std::vector<Story>& stories, const std::string& id) {
  for (const auto& s : stories) {
    if (s.story_id == id) return &s;
  }
  return nullptr;
}

// Continues the story under the cursor, or starts the first unused story of
// `bin`. Exhausted once the cursor is past the last sentence or every story
// of the bin has been started.
inline TemporalResult instantiate_temporal(const DiscourseState& state,
                                           const std::vector<Story>& stories,
                                           const std::string& bin) {
  bool any = std::any_of(stories.begin(), stories.end(),
                         [&](const Story& s) { return normalize(s.bin) == normalize(bin); });
  if (!any) throw NoStory("no story for bin " + bin);

  if (state.story_cursor) {
    const Story* story = find_story(stories, state.story_cursor->story_id);
    if (story && state.story_cursor->next < story->sentences.size()) {
      return story_candidate(*story, state.story_cursor->next);
    }
    return Exhausted{};
  }
  for (const auto& s : stories) {
    if (normalize(s.bin) != normalize(bin)) continue;
    if (state.content_ledger.count(story_key(s.story_id, 0))) continue;
    return story_candidate(s, 0);
  }
  return Exhausted{};
}

// ---- COMPARISON -------------------------------------------------------------

inline std::optional<RelationCandidate> instantiate_comparison(const DiscourseState& state,
                                                               const GeneratorContext& ctx) {
  auto window = salience_window(state);
  for (std::size_t i = 0; i < window.size(); ++i) {
    const Entity* a = ctx.kb.find(window[i]->entity_id);
    if (!a) continue;
    for (std::size_t j = i + 1; j < window.size(); ++j) {
      const Entity* b = ctx.kb.find(window[j]->entity_id);
      if (!b || a->type_path.front() != b->type_path.front()) continue;
      for (const auto& [attr, va] : a->attributes) {
        if (attr == "gender" || attr == "plural") continue;
        auto it = b->attributes.find(attr);
        if (it == b->attributes.end() || it->second.text() == va.text()) continue;
        std::string lo = std::min(a->id, b->id);
        std::string hi = std::max(a->id, b->id);
        std::string key = "compare:" + lo + ":" + hi + ":" + attr;
        if (state.content_ledger.count(key)) continue;
        const Template& phrase = template_or(ctx.templates, "phrase." + attr, "phrase.generic");
        try {
          std::string pa = realize_template(phrase, fact_slots(*a, attr, va, ctx.lexicon));
          std::string pb = realize_template(phrase, fact_slots(*b, attr, it->second, ctx.lexicon));
          pa.pop_back();  // realized phrases end in '.'
          pb.pop_back();
          pa[0] = lower(pa[0]);
          pb[0] = lower(pb[0]);
          RelationCandidate c;
          c.relation = DiscourseRelation::COMPARISON;
          c.dialogue_act = DialogueAct::STATEMENT;
          c.source = ContentSource::structured;
          c.content_key = key;
          c.focus_entity = a->id;
          c.mentions = {b->id, a->id};
          c.text = realize_template(ctx.templates.at("compare"),
                                    {{"a", a->name}, {"a_phrase", pa}, {"b", b->name}, {"b_phrase", pb}});
          return c;
        } catch (const MissingSlot&) {
          continue;
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace relchat
