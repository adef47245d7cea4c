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

#include <algorithm>
#include <set>
#include <string>

#include "test_support.hpp"

namespace relchat {
namespace {

using test::say;
using test::shipped;
using R = DiscourseRelation;

DialogueAct classify(const std::string& text) { return classify_user_act(text, DiscourseState{}); }

TEST(Classify, PaperExamples) {
  EXPECT_EQ(classify("Let's talk about movies."), DialogueAct::TOPIC_PROPOSAL);
  EXPECT_EQ(classify("Okay why?"), DialogueAct::WHY_QUESTION);
  EXPECT_EQ(classify("Sure."), DialogueAct::AGREEMENT);
}

TEST(Classify, RuleOrder) {
  struct Case {
    const char* text;
    DialogueAct act;
  };
  const Case cases[] = {
      {"Why do you like him?", DialogueAct::WHY_QUESTION},
      {"why not", DialogueAct::WHY_QUESTION},
      {"What other movies has Matt Damon been in?", DialogueAct::WH_QUESTION},
      {"So who stars in it?", DialogueAct::WH_QUESTION},
      {"Do you know who directed it?", DialogueAct::WH_QUESTION},
      {"Have you heard much about it in terms of the plot?", DialogueAct::YN_QUESTION},
      {"Is it good", DialogueAct::YN_QUESTION},
      {"Can we talk about comics?", DialogueAct::YN_QUESTION},
      {"I want to talk about monsters", DialogueAct::TOPIC_PROPOSAL},
      {"Yes please", DialogueAct::AGREEMENT},
      {"Absolutely!", DialogueAct::AGREEMENT},
      {"Same.", DialogueAct::AGREEMENT},
      {"No thanks", DialogueAct::REJECTION},
      {"Nope.", DialogueAct::REJECTION},
      {"I like Magneto.", DialogueAct::STATEMENT_OPINION},
      {"I really hate sharks", DialogueAct::STATEMENT_OPINION},
      {"My favorite is Storm", DialogueAct::STATEMENT_OPINION},
      {"I saw Jaws yesterday.", DialogueAct::STATEMENT},
      {"Yes I saw it", DialogueAct::STATEMENT},
      {"x", DialogueAct::STATEMENT},
  };
  for (const auto& c : cases) EXPECT_EQ(classify(c.text), c.act) << c.text;
}

TEST(Classify, TotalOverArbitraryText) {
  for (const char* text : {"?", "...", "12345", "   hmm   ", "¿qué?", "ok ok ok ok"}) {
    DialogueAct act = classify(text);
    EXPECT_NE(to_string(act), "?") << text;
  }
}

TEST(Decide, Table) {
  DiscourseState s;
  auto wh = select_system_act(DialogueAct::WH_QUESTION, s);
  EXPECT_EQ(wh.system_act, DialogueAct::ANSWER);
  EXPECT_EQ(wh.preferred_relations, (std::vector<R>{R::EXPANSION}));
  EXPECT_TRUE(wh.must_answer);
  EXPECT_TRUE(select_system_act(DialogueAct::YN_QUESTION, s).must_answer);

  auto why = select_system_act(DialogueAct::WHY_QUESTION, s);
  EXPECT_TRUE(why.must_answer);
  EXPECT_EQ(why.preferred_relations, (std::vector<R>{R::CONTINGENCY}));

  auto topic = select_system_act(DialogueAct::TOPIC_PROPOSAL, s);
  EXPECT_EQ(topic.system_act, DialogueAct::STATEMENT_OPINION);
  EXPECT_EQ(topic.preferred_relations, (std::vector<R>{R::EXPANSION, R::CONTINGENCY}));
  EXPECT_TRUE(topic.follow_up_question);

  auto statement = select_system_act(DialogueAct::STATEMENT_OPINION, s);
  EXPECT_EQ(statement.preferred_relations, (std::vector<R>{R::EXPANSION, R::CONTINGENCY, R::COMPARISON, R::TEMPORAL}));
  EXPECT_FALSE(statement.must_answer);
}

TEST(Decide, AgreementExecutesPendingOffer) {
  DiscourseState s;
  EXPECT_FALSE(select_system_act(DialogueAct::AGREEMENT, s).execute_offer);
  s.pending_offer = Offer{"story", "dracula_films", "?"};
  auto d = select_system_act(DialogueAct::AGREEMENT, s);
  EXPECT_TRUE(d.execute_offer);
  EXPECT_EQ(d.preferred_relations, (std::vector<R>{R::TEMPORAL}));
}

TEST(Decide, MustAnswerOnlyForQuestionsAndDeterministic) {
  DiscourseState s;
  for (const auto& [act, _] : detail::kActNames) {
    auto a = select_system_act(act, s);
    auto b = select_system_act(act, s);
    EXPECT_EQ(a.preferred_relations, b.preferred_relations);
    EXPECT_EQ(a.system_act, b.system_act);
    if (a.must_answer) EXPECT_TRUE(is_question(act));
  }
}

TEST(Topics, MatchAndPhrase) {
  const auto& topics = shipped().topics;
  ASSERT_NE(topics.match("Let's talk about movies."), nullptr);
  EXPECT_EQ(topics.match("Let's talk about movies.")->key, "movies");
  EXPECT_EQ(topics.match("I like comic books")->key, "comics");
  EXPECT_EQ(topics.match("movies about aliens")->key, "monsters");
  EXPECT_EQ(topics.match("nothing relevant"), nullptr);
  EXPECT_EQ(topic_phrase("Let's talk about monster movies!"), "monster movies");
  EXPECT_EQ(topics.find("books")->bin, "books");
  EXPECT_EQ(topics.find("cooking"), nullptr);
}

TEST(AttributeMap, LongestThenEarliest) {
  const auto& map = shipped().attribute_map;
  EXPECT_EQ(map.match("Who stars in it?"), "actor");
  EXPECT_EQ(map.match("What other movies has Matt Damon been in?"), "actedIn");
  EXPECT_EQ(map.match("When did it first appear?"), "firstAppearance");
  EXPECT_EQ(map.match("What do you think of Magneto?"), "opinion");
  EXPECT_FALSE(map.match("hello there"));
  auto m = AttributeKeywordMap::from_json({{"star", "actor"}, {"plot", "plot"}});
  EXPECT_EQ(m.match("plot with a star"), "plot");
}

TurnContext context_for(const std::string& text, const DiscourseState& s) {
  const auto& fx = shipped();
  TurnContext ctx;
  ctx.user_text = text;
  ctx.user_act = classify_user_act(text, s);
  ctx.user_entities = mention_ids(find_mentions(text, s, fx.kb, fx.stopwords));
  if (s.topic) ctx.topic = fx.topics.find(*s.topic);
  return ctx;
}

TEST(Gather, StarsQuestionPoolsBothSources) {
  const auto& fx = shipped();
  DiscourseState s;
  say(s, fx.kb);
  say(s, fx.kb, {"jason_bourne"});
  say(s, fx.kb, {"jason_bourne"});
  auto ctx = context_for("So who stars in it?", s);
  auto pool = gather_candidates(select_system_act(ctx.user_act, s), ctx, s, fx);
  bool structured = false;
  bool search = false;
  for (const auto& c : pool) {
    EXPECT_EQ(c.dialogue_act, DialogueAct::ANSWER);
    if (c.source == ContentSource::structured && c.text.find("Matt Damon") != std::string::npos) structured = true;
    if (c.source == ContentSource::search) search = true;
  }
  EXPECT_TRUE(structured);
  EXPECT_TRUE(search);
}

TEST(Gather, HitchhikersOnePerSource) {
  const auto& fx = shipped();
  DiscourseState s;
  say(s, fx.kb);
  auto ctx = context_for("What do you know about the Hitchhiker's Guide to the Galaxy?", s);
  auto pool = gather_candidates(select_system_act(ctx.user_act, s), ctx, s, fx);
  ASSERT_EQ(pool.size(), 2u);
  std::set<ContentSource> sources;
  for (const auto& c : pool) sources.insert(c.source);
  EXPECT_EQ(sources, (std::set<ContentSource>{ContentSource::structured, ContentSource::search}));
}

TEST(Gather, EmptyFixturesGiveEmptyPool) {
  const auto& shipped_fx = shipped();
  Fixtures fx{KnowledgeBase{}, Index{}, shipped_fx.templates, {}, {}, SentimentLexicon{}, shipped_fx.stopwords,
              TopicTable{}, shipped_fx.attribute_map};
  DiscourseState s;
  say(s, fx.kb);
  for (const char* text : {"Who stars in it?", "I like movies", "Why?", "Sure"}) {
    TurnContext ctx;
    ctx.user_text = text;
    ctx.user_act = classify_user_act(text, s);
    EXPECT_TRUE(gather_candidates(select_system_act(ctx.user_act, s), ctx, s, fx).empty()) << text;
  }
}

TEST(Gather, WhyAfterOpinionGivesJustification) {
  const auto& fx = shipped();
  DiscourseState s;
  TurnRecord open = test::make_turn(0);
  update_state(s, open, fx.kb);
  update_state(s, test::make_turn(1, {"magneto"}, DialogueAct::STATEMENT_OPINION), fx.kb);
  TurnRecord opinion = test::make_turn(2, {"magneto"});
  opinion.content_keys = {"opinion:magneto"};
  update_state(s, opinion, fx.kb);
  auto ctx = context_for("Okay why?", s);
  auto pool = gather_candidates(select_system_act(ctx.user_act, s), ctx, s, fx);
  ASSERT_FALSE(pool.empty());
  EXPECT_NE(pool.front().text.find("because he can control metal"), std::string::npos);
  EXPECT_EQ(pool.front().relation, R::CONTINGENCY);
}

TEST(Gather, TopicProposalOffersOpinionWithQuestion) {
  const auto& fx = shipped();
  DiscourseState s;
  say(s, fx.kb);
  TurnRecord user = test::make_turn(1, {}, DialogueAct::TOPIC_PROPOSAL);
  user.topic = "movies";
  update_state(s, user, fx.kb);
  auto ctx = context_for("Let's talk about movies.", s);
  auto pool = gather_candidates(select_system_act(ctx.user_act, s), ctx, s, fx);
  bool found = std::any_of(pool.begin(), pool.end(), [](const Candidate& c) {
    return c.utterance() == "I love movies! Which movies have you seen recently?";
  });
  EXPECT_TRUE(found);
}

TEST(Gather, LedgerFiltered) {
  const auto& fx = shipped();
  DiscourseState s;
  say(s, fx.kb);
  say(s, fx.kb, {"aliens"});
  for (int round = 0; round < 8; ++round) {
    auto ctx = context_for("I like Aliens", s);
    auto pool = gather_candidates(select_system_act(ctx.user_act, s), ctx, s, fx);
    if (pool.empty()) break;
    for (const auto& c : pool) {
      EXPECT_FALSE(s.content_ledger.count(c.content_key)) << c.content_key;
      for (const auto& k : c.extra_keys) EXPECT_FALSE(s.content_ledger.count(k)) << k;
    }
    mark_content_used(s, pool.front().content_key);
  }
}

}  // namespace
}  // namespace relchat
