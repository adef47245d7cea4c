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


#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "test_support.hpp"

namespace relchat {
namespace {

using test::say;
using test::shipped;

Template make_template(std::string pattern, std::vector<std::string> slots) {
  return Template{"t", std::move(pattern), std::move(slots), DialogueAct::STATEMENT};
}

TEST(RealizeTemplate, ContingencyPattern) {
  auto t = make_template("I think {entity} is {sentiment} because {justification}",
                         {"entity", "sentiment", "justification"});
  EXPECT_EQ(realize_template(t, {{"entity", "Magneto"}, {"sentiment", "awesome"},
                                 {"justification", "he can control metal"}}),
            "I think Magneto is awesome because he can control metal.");
}

TEST(RealizeTemplate, NoSlotsAddsPunctuationOnly) {
  EXPECT_EQ(realize_template(make_template("what do you want to talk about?", {}), {}),
            "What do you want to talk about?");
  EXPECT_EQ(realize_template(make_template("hello there", {}), {}), "Hello there.");
}

TEST(RealizeTemplate, MissingSlotNamed) {
  auto t = make_template("I think {entity} is {sentiment} because {justification}",
                         {"entity", "sentiment", "justification"});
  try {
    realize_template(t, {{"entity", "Magneto"}, {"sentiment", "awesome"}});
    FAIL() << "expected MissingSlot";
  } catch (const MissingSlot& e) {
    EXPECT_EQ(e.slot(), "justification");
  }
  EXPECT_THROW(realize_template(t, {{"entity", "M"}, {"sentiment", " "}, {"justification", "x"}}), MissingSlot);
}

TEST(RealizeTemplate, NeverLeavesBraces) {
  auto t = make_template("{a} and {b}", {"a", "b"});
  auto out = realize_template(t, {{"a", "{b}"}, {"b", "x{y}"}});
  EXPECT_EQ(out.find('{'), std::string::npos);
  EXPECT_EQ(out.find('}'), std::string::npos);
}

TEST(Templates, PlaceholdersMustBeDeclared) {
  TemplateSet set;
  EXPECT_THROW(set.add(make_template("Hi {name}", {})), Error);
  std::istringstream in(R"({"template_id":"x","pattern":"{a}","required_slots":["a"]})" "\n"
                        R"({"template_id":"x","pattern":"b"})" "\n");
  EXPECT_THROW(parse_templates(in, "mem"), ParseError);
}

TEST(Templates, ShippedSetIsConsistent) {
  const auto& templates = shipped().templates;
  EXPECT_GE(templates.size(), 20u);
  for (const char* id : {"open.prompt", "justification", "offer.story", "topic.opinion", "compare", "rel.generic",
                         "followup.generic", "fact.generic", "phrase.generic"}) {
    EXPECT_NE(templates.find(id), nullptr) << id;
  }
  EXPECT_FALSE(templates.family("reprompt.").empty());
  EXPECT_FALSE(templates.family("opinion.").empty());
  for (const auto& [id, t] : templates.all()) {
    Slots slots;
    for (const auto& s : t.required_slots) slots[s] = "value";
    auto out = realize_template(t, slots);
    EXPECT_EQ(out.find('{'), std::string::npos) << id;
  }
}

TEST(Pronominalize, UniqueSalientMovieBecomesIt) {
  const auto& kb = shipped().kb;
  DiscourseState s;
  say(s, kb);
  say(s, kb, {"jason_bourne"});
  EXPECT_EQ(pronominalize("Jason Bourne stars Matt Damon.", "jason_bourne", s, kb), "It stars Matt Damon.");
}

TEST(Pronominalize, TwoSalientMoviesKeepName) {
  const auto& kb = shipped().kb;
  DiscourseState s;
  say(s, kb, {"alien"});
  say(s, kb, {"aliens"});
  EXPECT_EQ(pronominalize("Aliens came out in 1986.", "aliens", s, kb), "Aliens came out in 1986.");
}

TEST(Pronominalize, UnmentionedEntityKeepsName) {
  const auto& kb = shipped().kb;
  DiscourseState s;
  say(s, kb);
  EXPECT_EQ(pronominalize("Jaws came out in 1975.", "jaws", s, kb), "Jaws came out in 1975.");
}

TEST(Pronominalize, PersonAndPossessive) {
  const auto& kb = shipped().kb;
  DiscourseState s;
  say(s, kb, {"jason_bourne"});
  say(s, kb, {"matt_damon"});
  EXPECT_EQ(pronominalize("Matt Damon was in Jaws.", "matt_damon", s, kb), "He was in Jaws.");
  EXPECT_EQ(pronominalize("Jason Bourne's rating is high.", "jason_bourne", s, kb), "Its rating is high.");
  say(s, kb, {"alicia_vikander"});
  EXPECT_EQ(pronominalize("Matt Damon was in Jaws.", "matt_damon", s, kb), "Matt Damon was in Jaws.");
}

TEST(Pronominalize, PronounRoundTripsToFocus) {
  const auto& kb = shipped().kb;
  DiscourseState s;
  say(s, kb, {"inception"});
  say(s, kb, {"leonardo_dicaprio"});
  for (const auto& [text, id] : std::vector<std::pair<std::string, std::string>>{
           {"Inception came out in 2010.", "inception"}, {"Leonardo DiCaprio was born in 1974.", "leonardo_dicaprio"}}) {
    std::string out = pronominalize(text, id, s, kb);
    if (out == text) continue;
    DiscourseState after = s;
    TurnRecord t = test::make_turn(after.turns.size(), {id});
    update_state(after, t, kb);
    EXPECT_EQ(resolve_reference(after, tokenize(out).front(), kb), id) << out;
  }
}

TEST(PackageExtract, SynopsisFirstSentence) {
  const auto& index = shipped().index;
  SearchResult r;
  r.doc_id = "jason_bourne_synopsis";
  r.sentence_index = 1;
  EXPECT_EQ(package_extract(r, index, ExtractMode::first_sentence),
            "The CIA's most dangerous former operative is drawn out of hiding to uncover more explosive truths "
            "about his past.");
}

TEST(PackageExtract, OneSentenceDocBestTwo) {
  Index index(std::vector<Document>{{"one", "", "Only this sentence here.", std::nullopt}});
  auto hits = index.query("sentence", 1);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(package_extract(hits.front(), index, ExtractMode::best_two), "Only this sentence here.");
}

TEST(PackageExtract, NosferatuBestTwo) {
  const auto& index = shipped().index;
  auto hits = index.query("first film vampire", 1);
  ASSERT_EQ(hits.size(), 1u);
  std::string text = package_extract(hits.front(), index, ExtractMode::best_two);
  EXPECT_EQ(text.rfind("Nosferatu is the first film", 0), 0u);
  EXPECT_EQ(sentences_of(text).size(), 2u);
}

TEST(PackageExtract, ContiguousSpanOfBody) {
  const auto& index = shipped().index;
  for (const auto& doc : index.documents()) {
    std::string body = collapse_whitespace(doc.body);
    auto spans = split_sentences(doc.body);
    for (std::size_t i = 0; i < spans.size(); ++i) {
      SearchResult r{doc.doc_id, 1.0, std::string(spans[i].view(doc.body)), i};
      for (auto mode : {ExtractMode::first_sentence, ExtractMode::best_two}) {
        EXPECT_NE(body.find(package_extract(r, index, mode)), std::string::npos) << doc.doc_id;
      }
    }
  }
}

}  // namespace
}  // namespace relchat
