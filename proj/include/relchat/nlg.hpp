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

// Surface realization: slot templates, pronominalization of the focus entity,
// and packaging of search extracts.

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relchat/acts.hpp"
#include "relchat/discourse.hpp"
#include "relchat/error.hpp"
#include "relchat/kb.hpp"
#include "relchat/search.hpp"
#include "relchat/text.hpp"

namespace relchat {

struct Template {
  std::string template_id;
  std::string pattern;
  std::vector<std::string> required_slots;
  DialogueAct dialogue_act = DialogueAct::STATEMENT;
};

using Slots = std::map<std::string, std::string>;

// Placeholder names in order of appearance.
inline std::vector<std::string> placeholders(std::string_view pattern) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = pattern.find('{', pos)) != std::string_view::npos) {
    auto close = pattern.find('}', pos);
    if (close == std::string_view::npos) break;
    names.emplace_back(pattern.substr(pos + 1, close - pos - 1));
    pos = close + 1;
  }
  return names;
}

class TemplateSet {
 public:
  TemplateSet() = default;

  void add(Template t) {
    for (const auto& name : placeholders(t.pattern)) {
      if (std::find(t.required_slots.begin(), t.required_slots.end(), name) ==
          t.required_slots.end()) {
        throw Error("template " + t.template_id + ": placeholder {" + name +
                    "} not in required_slots");
      }
    }
    std::string id = t.template_id;
    if (!templates_.emplace(id, std::move(t)).second) {
      throw DuplicateId("duplicate template id: " + id);
    }
  }

  const Template* find(const std::string& id) const {
    auto it = templates_.find(id);
    return it == templates_.end() ? nullptr : &it->second;
  }

  const Template& at(const std::string& id) const {
    if (const Template* t = find(id)) return *t;
    throw Error("unknown template: " + id);
  }

  // Templates whose id starts with `prefix`, in id order.
  std::vector<const Template*> family(const std::string& prefix) const {
    std::vector<const Template*> out;
    for (auto it = templates_.lower_bound(prefix);
         it != templates_.end() && it->first.rfind(prefix, 0) == 0; ++it) {
      out.push_back(&it->second);
    }
    return out;
  }

  std::size_t size() const { return templates_.size(); }
  const std::map<std::string, Template>& all() const { return templates_; }

 private:
  std::map<std::string, Template> templates_;
};

inline TemplateSet parse_templates(std::istream& in, const std::string& origin) {
  TemplateSet set;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Template t;
      t.template_id = j.at("template_id").get<std::string>();
      t.pattern = j.at("pattern").get<std::string>();
      t.required_slots = j.value("required_slots", std::vector<std::string>{});
      t.dialogue_act = parse_act(j.value("dialogue_act", std::string("STATEMENT")));
      set.add(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(origin, number, e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(origin, number, e.what());
    }
  }
  return set;
}

inline TemplateSet load_templates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open templates: " + path);
  return parse_templates(in, path);
}

inline std::string capitalize_first(std::string s) {
  for (char& c : s) {
    if (is_alnum(c)) {
      c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      break;
    }
    if (!is_space(c) && c != '"' && c != '\'') break;
  }
  return s;
}

inline std::string ensure_terminal_punctuation(std::string s) {
  s = trim(s);
  if (s.empty()) return s;
  std::size_t i = s.size();
  while (i > 0 && (s[i - 1] == '"' || s[i - 1] == '\'' || s[i - 1] == ')')) --i;
  if (i > 0 && (s[i - 1] == '.' || s[i - 1] == '!' || s[i - 1] == '?')) return s;
  return s + ".";
}

// Substitutes every {slot}; braces inside slot values are dropped so the
// output never carries an unfilled placeholder.
inline std::string realize_template(const Template& t, const Slots& slots) {
  for (const auto& name : t.required_slots) {
    auto it = slots.find(name);
    if (it == slots.end() || trim(it->second).empty()) throw MissingSlot(name);
  }
  std::string out;
  std::size_t pos = 0;
  while (pos < t.pattern.size()) {
    auto open = t.pattern.find('{', pos);
    if (open == std::string::npos) {
      out.append(t.pattern, pos, std::string::npos);
      break;
    }
    auto close = t.pattern.find('}', open);
    if (close == std::string::npos) {
      out.append(t.pattern, pos, open - pos);
      break;
    }
    out.append(t.pattern, pos, open - pos);
    std::string name = t.pattern.substr(open + 1, close - open - 1);
    auto it = slots.find(name);
    if (it == slots.end()) throw MissingSlot(name);
    for (char c : it->second) {
      if (c != '{' && c != '}') out.push_back(c);
    }
    pos = close + 1;
  }
  return ensure_terminal_punctuation(capitalize_first(collapse_whitespace(out)));
}

namespace detail {

// Name or alias at the start of `text`, longest first; returns its length.
inline std::size_t leading_name(std::string_view text, const Entity& e) {
  std::vector<std::string> names = e.aliases;
  names.push_back(e.name);
  std::sort(names.begin(), names.end(),
            [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
  for (const auto& n : names) {
    if (n.empty() || !starts_with_ci(text, n)) continue;
    if (n.size() < text.size() && is_alnum(text[n.size()])) continue;
    return n.size();
  }
  return 0;
}

}  // namespace detail

// Subject pronoun for an entity, empty when no safe choice exists (a Person
// of unknown gender).
inline std::string subject_pronoun(const Entity& e, const KnowledgeBase& kb) {
  if (!kb.is_person(e)) return "it";
  auto g = kb.gender(e);
  if (g == "male") return "he";
  if (g == "female") return "she";
  return {};
}

inline std::string possessive_pronoun(const std::string& subject) {
  if (subject == "he") return "his";
  if (subject == "she") return "her";
  return "its";
}

// Replaces the focus entity's name at the start of `text` with a pronoun when
// the entity is the only salient entity of its coarse type (Person vs not) in
// the anaphora window, and resolving that pronoun after this turn would yield
// the focus again.
inline std::string pronominalize(const std::string& text, const std::string& focus_entity,
                                 const DiscourseState& state, const KnowledgeBase& kb) {
  const Entity* focus = kb.find(focus_entity);
  if (!focus) return text;
  std::size_t name_len = detail::leading_name(text, *focus);
  if (name_len == 0) return text;

  bool focus_person = kb.is_person(*focus);
  bool in_window = false;
  for (const SalienceEntry* entry : salience_window(state)) {
    const Entity* e = kb.find(entry->entity_id);
    if (!e || kb.is_person(*e) != focus_person) continue;
    if (entry->entity_id != focus_entity) return text;
    in_window = true;
  }
  if (!in_window) return text;

  std::string pronoun = subject_pronoun(*focus, kb);
  if (pronoun.empty()) return text;

  // Round trip: the pronoun must resolve to the focus on the post-turn state.
  DiscourseState after = state;
  TurnRecord probe;
  probe.index = after.turns.size();
  probe.speaker = (after.turns.empty() || after.turns.back().speaker == Speaker::user)
                      ? Speaker::system
                      : Speaker::user;
  probe.mentioned_entities = {focus_entity};
  update_state(after, probe, kb);
  try {
    if (resolve_reference(after, pronoun, kb) != focus_entity) return text;
  } catch (const NoAntecedent&) {
    return text;
  }

  std::string rest = text.substr(name_len);
  std::string replacement = pronoun;
  if (rest.rfind("'s", 0) == 0) {
    replacement = possessive_pronoun(pronoun);
    rest = rest.substr(2);
  }
  return capitalize_first(replacement + rest);
}

enum class ExtractMode { first_sentence, best_two };

// Packs a search hit into an utterance. The text is always a contiguous span
// of the document body (whitespace collapsed).
inline std::string package_extract(const SearchResult& result, const Index& index,
                                   ExtractMode mode) {
  const Document* doc = index.find(result.doc_id);
  if (!doc) return collapse_whitespace(result.best_sentence);
  if (mode == ExtractMode::first_sentence) return collapse_whitespace(first_sentence(doc->body));
  auto spans = split_sentences(doc->body);
  if (spans.empty()) return collapse_whitespace(result.best_sentence);
  std::size_t i = std::min(result.sentence_index, spans.size() - 1);
  std::size_t end = (i + 1 < spans.size()) ? spans[i + 1].end : spans[i].end;
  return collapse_whitespace(std::string_view(doc->body).substr(spans[i].begin, end - spans[i].begin));
}

}  // namespace relchat
