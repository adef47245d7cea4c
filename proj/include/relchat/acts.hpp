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

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relchat/error.hpp"

namespace relchat {

enum class DialogueAct {
  OPEN_QUESTION,
  WH_QUESTION,
  YN_QUESTION,
  WHY_QUESTION,
  TOPIC_PROPOSAL,
  STATEMENT,
  STATEMENT_OPINION,
  AGREEMENT,
  REJECTION,
  OFFER,
  ANSWER,
  REPROMPT,
};

enum class DiscourseRelation { CONTINGENCY, COMPARISON, EXPANSION, TEMPORAL };

enum class ContentSource { structured, search, template_ };

enum class Speaker { user, system };

namespace detail {

template <typename E, std::size_t N>
std::string_view enum_name(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "?";
}

template <typename E, std::size_t N>
E enum_parse(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view name,
             const char* kind) {
  for (const auto& [e, n] : table) {
    if (n == name) return e;
  }
  throw Error(std::string("unknown ") + kind + ": " + std::string(name));
}

inline constexpr std::array<std::pair<DialogueAct, std::string_view>, 12> kActNames = {{
    {DialogueAct::OPEN_QUESTION, "OPEN_QUESTION"},
    {DialogueAct::WH_QUESTION, "WH_QUESTION"},
    {DialogueAct::YN_QUESTION, "YN_QUESTION"},
    {DialogueAct::WHY_QUESTION, "WHY_QUESTION"},
    {DialogueAct::TOPIC_PROPOSAL, "TOPIC_PROPOSAL"},
    {DialogueAct::STATEMENT, "STATEMENT"},
    {DialogueAct::STATEMENT_OPINION, "STATEMENT_OPINION"},
    {DialogueAct::AGREEMENT, "AGREEMENT"},
    {DialogueAct::REJECTION, "REJECTION"},
    {DialogueAct::OFFER, "OFFER"},
    {DialogueAct::ANSWER, "ANSWER"},
    {DialogueAct::REPROMPT, "REPROMPT"},
}};

inline constexpr std::array<std::pair<DiscourseRelation, std::string_view>, 4> kRelationNames = {{
    {DiscourseRelation::CONTINGENCY, "CONTINGENCY"},
    {DiscourseRelation::COMPARISON, "COMPARISON"},
    {DiscourseRelation::EXPANSION, "EXPANSION"},
    {DiscourseRelation::TEMPORAL, "TEMPORAL"},
}};

inline constexpr std::array<std::pair<ContentSource, std::string_view>, 3> kSourceNames = {{
    {ContentSource::structured, "structured"},
    {ContentSource::search, "search"},
    {ContentSource::template_, "template"},
}};

inline constexpr std::array<std::pair<Speaker, std::string_view>, 2> kSpeakerNames = {{
    {Speaker::user, "user"},
    {Speaker::system, "system"},
}};

}  // namespace detail

inline std::string_view to_string(DialogueAct a) { return detail::enum_name(detail::kActNames, a); }
inline std::string_view to_string(DiscourseRelation r) {
  return detail::enum_name(detail::kRelationNames, r);
}
inline std::string_view to_string(ContentSource s) { return detail::enum_name(detail::kSourceNames, s); }
inline std::string_view to_string(Speaker s) { return detail::enum_name(detail::kSpeakerNames, s); }

inline DialogueAct parse_act(std::string_view s) {
  return detail::enum_parse(detail::kActNames, s, "dialogue act");
}
inline DiscourseRelation parse_relation(std::string_view s) {
  return detail::enum_parse(detail::kRelationNames, s, "discourse relation");
}
inline ContentSource parse_source(std::string_view s) {
  return detail::enum_parse(detail::kSourceNames, s, "content source");
}
inline Speaker parse_speaker(std::string_view s) {
  return detail::enum_parse(detail::kSpeakerNames, s, "speaker");
}

// What the policy wants the next system turn to do.
struct PolicyDecision {
  DialogueAct system_act = DialogueAct::STATEMENT;
  std::vector<DiscourseRelation> preferred_relations;
  bool must_answer = false;
  // AGREEMENT while an offer is pending: carry the offer out.
  bool execute_offer = false;
  // Topic proposals are answered with an opinion plus a follow-up question.
  bool follow_up_question = false;

  bool prefers(DiscourseRelation r) const {
    for (auto p : preferred_relations) {
      if (p == r) return true;
    }
    return false;
  }
};

inline bool is_question(DialogueAct a) {
  return a == DialogueAct::OPEN_QUESTION || a == DialogueAct::WH_QUESTION ||
         a == DialogueAct::YN_QUESTION || a == DialogueAct::WHY_QUESTION;
}

}  // namespace relchat
