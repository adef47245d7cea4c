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

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"

namespace relchat {
namespace {

using test::data_path;
using test::shipped;
using test::shipped_config;

std::unique_ptr<Engine> make_engine(EngineConfig config = shipped_config()) {
  return std::make_unique<Engine>(std::move(config), shipped());
}

nlohmann::json config_json() {
  std::ifstream in(data_path("config.json"));
  return nlohmann::json::parse(in);
}

std::vector<std::string> lines_of(const std::string& script) {
  std::ifstream in(data_path("scripts/" + script));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

TEST(Config, ShippedConfigLoads) {
  const auto& c = shipped_config();
  EXPECT_EQ(c.kb_snapshots.size(), 2u);
  EXPECT_EQ(c.source_priority, (std::vector<std::string>{"wiki", "kgraph"}));
  EXPECT_GT(c.turn_budget_ms, 0);
}

TEST(Config, Errors) {
  auto j = config_json();
  j.erase("corpus");
  EXPECT_THROW(parse_config(j, RELCHAT_DATA_DIR), ConfigError);

  j = config_json();
  j["stories"] = "no/such/file.jsonl";
  EXPECT_THROW(parse_config(j, RELCHAT_DATA_DIR), ConfigError);

  j = config_json();
  j["kb"] = nlohmann::json::array();
  EXPECT_THROW(parse_config(j, RELCHAT_DATA_DIR), ConfigError);

  j = config_json();
  j["turn_budget_ms"] = 0;
  EXPECT_THROW(parse_config(j, RELCHAT_DATA_DIR), ConfigError);

  j = config_json();
  j["source_priority"] = "wiki";
  EXPECT_THROW(parse_config(j, RELCHAT_DATA_DIR), ConfigError);

  EXPECT_THROW(load_config(data_path("missing.json")), ConfigError);
  EXPECT_THROW(load_config(data_path("stopwords.txt")), ParseError);
}

TEST(Config, UnknownPrioritySourceRejectedAtLoad) {
  auto j = config_json();
  j["source_priority"] = {"wiki"};
  auto c = parse_config(j, RELCHAT_DATA_DIR);
  EXPECT_THROW(load_fixtures(c), UnknownSource);
}

TEST(Engine, OpeningPromptAndIds) {
  auto engine = make_engine();
  auto a = engine->create_session();
  auto b = engine->create_session();
  EXPECT_NE(a, b);
  EXPECT_EQ(a, "s000001");
  auto t = engine->transcript(a);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].speaker, Speaker::system);
  EXPECT_EQ(t[0].text, "What do you want to talk about?");
  EXPECT_EQ(t[0].dialogue_act, DialogueAct::OPEN_QUESTION);
}

TEST(Engine, TopicProposalGetsOpinionAndQuestion) {
  auto engine = make_engine();
  auto id = engine->create_session();
  auto r = engine->post_user_turn(id, "Let's talk about movies.");
  EXPECT_EQ(r.reply, "I love movies! Which movies have you seen recently?");
  EXPECT_EQ(r.user_turn.dialogue_act, DialogueAct::TOPIC_PROPOSAL);
  EXPECT_EQ(r.user_turn.topic, "movies");
  EXPECT_EQ(engine->state(id).topic, "movies");
  EXPECT_EQ(r.system_turn.index, 2u);
  EXPECT_EQ(engine->transcript(id).size(), 3u);
}

TEST(Engine, WhyAfterMagnetoOpinion) {
  auto engine = make_engine();
  auto id = engine->create_session();
  engine->post_user_turn(id, "Let's talk about comic books.");
  engine->post_user_turn(id, "Who is your favorite character?");
  auto r = engine->post_user_turn(id, "Okay why?");
  EXPECT_NE(r.reply.find("because he can control metal"), std::string::npos) << r.reply;
  EXPECT_EQ(r.system_turn.relation_used, DiscourseRelation::CONTINGENCY);
}

TEST(Engine, Errors) {
  auto engine = make_engine();
  EXPECT_THROW(engine->post_user_turn("nope", "hi"), UnknownSession);
  EXPECT_THROW(engine->transcript("nope"), UnknownSession);
  EXPECT_THROW(engine->metrics("nope"), UnknownSession);
  EXPECT_FALSE(engine->has_session("nope"));
  auto id = engine->create_session();
  EXPECT_THROW(engine->post_user_turn(id, "   "), EmptyInput);
  EXPECT_THROW(engine->post_user_turn(id, ""), EmptyInput);
  EXPECT_EQ(engine->transcript(id).size(), 1u);
}

TEST(Engine, DebugPayload) {
  auto engine = make_engine();
  auto id = engine->create_session();
  auto r = engine->post_user_turn(id, "I watched Jason Bourne recently.");
  for (const char* key :
       {"user_act", "decision", "candidates", "selected", "salience", "topic", "latency_ms", "within_budget"}) {
    EXPECT_TRUE(r.debug.contains(key)) << key;
  }
  EXPECT_EQ(r.debug["salience"][0]["entity_id"], "jason_bourne");
  EXPECT_LE(r.debug["candidates"].size(), 5u);
  EXPECT_GE(r.latency_ms, 0.0);
}

TEST(Engine, NoContentRepeatsWithinSession) {
  auto engine = make_engine();
  auto id = engine->create_session();
  for (const auto& line : lines_of("monster.txt")) engine->post_user_turn(id, line);
  std::set<std::string> seen;
  for (const auto& t : engine->transcript(id)) {
    if (t.speaker != Speaker::system) continue;
    for (const auto& k : t.content_keys) EXPECT_TRUE(seen.insert(k).second) << k;
  }
}

TEST(Engine, SessionsAreIsolated) {
  auto movie = lines_of("movie.txt");
  auto comics = lines_of("comics.txt");

  auto serial = make_engine();
  std::vector<std::string> serial_movie;
  std::vector<std::string> serial_comics;
  auto a = serial->create_session();
  for (const auto& l : movie) serial_movie.push_back(serial->post_user_turn(a, l).reply);
  auto b = serial->create_session();
  for (const auto& l : comics) serial_comics.push_back(serial->post_user_turn(b, l).reply);

  auto interleaved = make_engine();
  std::vector<std::string> mixed_movie;
  std::vector<std::string> mixed_comics;
  auto x = interleaved->create_session();
  auto y = interleaved->create_session();
  for (std::size_t i = 0; i < std::max(movie.size(), comics.size()); ++i) {
    if (i < comics.size()) mixed_comics.push_back(interleaved->post_user_turn(y, comics[i]).reply);
    if (i < movie.size()) mixed_movie.push_back(interleaved->post_user_turn(x, movie[i]).reply);
  }
  EXPECT_EQ(serial_movie, mixed_movie);
  EXPECT_EQ(serial_comics, mixed_comics);
}

TEST(Engine, TranscriptFileRoundTrip) {
  auto dir = std::filesystem::temp_directory_path() / "relchat_engine_test";
  std::filesystem::remove_all(dir);
  EngineConfig config = shipped_config();
  config.transcript_dir = dir.string();
  auto engine = make_engine(config);
  auto id = engine->create_session();
  for (const auto& line : lines_of("movie.txt")) engine->post_user_turn(id, line);
  engine->flush(id);

  auto loaded = load_transcript((dir / (id + ".jsonl")).string());
  auto live = engine->transcript(id);
  ASSERT_EQ(loaded.size(), live.size());
  for (std::size_t i = 0; i < live.size(); ++i) EXPECT_EQ(to_json(loaded[i]).dump(), to_json(live[i]).dump());

  DiscourseState replayed = replay(loaded, shipped().kb);
  DiscourseState state = engine->state(id);
  EXPECT_EQ(replayed.content_ledger, state.content_ledger);
  EXPECT_EQ(replayed.topic, state.topic);
  ASSERT_NE(state.focus(), nullptr);
  ASSERT_NE(replayed.focus(), nullptr);
  EXPECT_EQ(replayed.focus()->entity_id, state.focus()->entity_id);
  ASSERT_EQ(replayed.salience.size(), state.salience.size());
  for (std::size_t i = 0; i < state.salience.size(); ++i) {
    EXPECT_EQ(replayed.salience[i].entity_id, state.salience[i].entity_id);
  }
  EXPECT_EQ(to_json(compute_metrics(loaded)).dump(), to_json(engine->metrics(id)).dump());
  std::filesystem::remove_all(dir);
}

TEST(Repl, ImmediateQuit) {
  auto engine = make_engine();
  std::istringstream in("/quit\nI like movies\n");
  std::ostringstream out;
  auto m = run_repl(*engine, in, out);
  EXPECT_EQ(m.turn_count, 1u);
  EXPECT_EQ(out.str().rfind("S: What do you want to talk about?\n", 0), 0u);
  EXPECT_NE(out.str().find("metrics: {"), std::string::npos);
}

TEST(Repl, DebugToggleShowsCandidates) {
  auto engine = make_engine();
  std::istringstream in("/debug\nLet's talk about movies.\n/debug\nI watched Jason Bourne recently.\n");
  std::ostringstream out;
  auto m = run_repl(*engine, in, out);
  EXPECT_EQ(m.turn_count, 5u);
  std::string text = out.str();
  EXPECT_NE(text.find("(debug on)"), std::string::npos);
  EXPECT_NE(text.find("(debug off)"), std::string::npos);
  auto table = text.find("act=TOPIC_PROPOSAL");
  ASSERT_NE(table, std::string::npos);
  EXPECT_EQ(text.find("act=STATEMENT "), std::string::npos);
}

TEST(Script, MonsterDialogue) {
  auto engine = make_engine();
  std::ifstream in(data_path("scripts/monster.txt"));
  std::ostringstream out;
  auto results = run_script(*engine, in, out);
  ASSERT_EQ(results.size(), lines_of("monster.txt").size());
  EXPECT_NE(results.back().reply.find("Nosferatu"), std::string::npos);
  EXPECT_NE(results[2].reply.find("1986"), std::string::npos) << results[2].reply;
  EXPECT_NE(out.str().find("U: Same\n"), std::string::npos);
}

TEST(Script, CommentsAndBlankLinesSkipped) {
  auto engine = make_engine();
  std::istringstream in("# a comment\n\n   \nLet's talk about movies.\n");
  std::ostringstream out;
  auto results = run_script(*engine, in, out);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(out.str(),
            "S: What do you want to talk about?\nU: Let's talk about movies.\n"
            "S: I love movies! Which movies have you seen recently?\n");
}

}  // namespace
}  // namespace relchat
