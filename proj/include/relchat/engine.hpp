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

// Session engine: configuration and fixture loading, the per-turn pipeline
// (classify, decide, gather, rank, realize, update) and transcript sinks.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relchat/acts.hpp"
#include "relchat/discourse.hpp"
#include "relchat/error.hpp"
#include "relchat/kb.hpp"
#include "relchat/metrics.hpp"
#include "relchat/nlg.hpp"
#include "relchat/policy.hpp"
#include "relchat/ranker.hpp"
#include "relchat/relations.hpp"
#include "relchat/search.hpp"
#include "relchat/text.hpp"

namespace relchat {

struct SnapshotPath {
  std::string source;
  std::string path;
};

struct EngineConfig {
  std::vector<SnapshotPath> kb_snapshots;
  std::vector<std::string> source_priority;
  std::string ontology;
  std::string corpus;
  std::string opinions;
  std::string stories;
  std::string templates;
  std::string weights;
  std::string attribute_map;
  std::string stopwords;
  std::map<std::string, std::string> type_aliases;
  std::map<std::string, std::string> inverse_relations;
  nlohmann::json sentiment_lexicon = nlohmann::json::object();
  nlohmann::json topics = nlohmann::json::object();
  std::uint64_t seed = 0;  // reserved; nothing is stochastic
  int turn_budget_ms = 200;
  int port = 8080;
  std::string transcript_dir;  // empty: no transcript files
};

namespace detail {

inline std::string resolve_path(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return p;
  std::filesystem::path path(p);
  return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

inline void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("config: missing ") + what);
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError(std::string("config: ") + what + " not found: " + path);
  }
}

}  // namespace detail

// Reads a JSON config; relative paths are taken relative to the config file.
inline EngineConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base) {
  EngineConfig c;
  try {
    for (const auto& s : j.at("kb")) {
      c.kb_snapshots.push_back(
          {s.at("source").get<std::string>(), detail::resolve_path(base, s.at("path").get<std::string>())});
    }
    c.source_priority = j.at("source_priority").get<std::vector<std::string>>();
    c.ontology = detail::resolve_path(base, j.value("ontology", std::string{}));
    c.corpus = detail::resolve_path(base, j.at("corpus").get<std::string>());
    c.opinions = detail::resolve_path(base, j.at("opinions").get<std::string>());
    c.stories = detail::resolve_path(base, j.at("stories").get<std::string>());
    c.templates = detail::resolve_path(base, j.at("templates").get<std::string>());
    c.weights = detail::resolve_path(base, j.value("weights", std::string{}));
    c.attribute_map = detail::resolve_path(base, j.at("attribute_map").get<std::string>());
    c.stopwords = detail::resolve_path(base, j.at("stopwords").get<std::string>());
    c.type_aliases = j.value("type_aliases", std::map<std::string, std::string>{});
    c.inverse_relations = j.value("inverse_relations", std::map<std::string, std::string>{});
    c.sentiment_lexicon = j.value("sentiment_lexicon", nlohmann::json::object());
    c.topics = j.value("topics", nlohmann::json::object());
    c.seed = j.value("seed", std::uint64_t{0});
    c.turn_budget_ms = j.value("turn_budget_ms", 200);
    c.port = j.value("port", 8080);
    c.transcript_dir = detail::resolve_path(base, j.value("transcript_dir", std::string{}));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.kb_snapshots.empty()) throw ConfigError("config: no kb snapshots");
  for (const auto& s : c.kb_snapshots) detail::require_file(s.path, "kb snapshot");
  if (!c.ontology.empty()) detail::require_file(c.ontology, "ontology");
  detail::require_file(c.corpus, "corpus");
  detail::require_file(c.opinions, "opinions");
  detail::require_file(c.stories, "stories");
  detail::require_file(c.templates, "templates");
  if (!c.weights.empty()) detail::require_file(c.weights, "weights");
  detail::require_file(c.attribute_map, "attribute map");
  detail::require_file(c.stopwords, "stopwords");
  if (c.turn_budget_ms <= 0) throw ConfigError("config: turn_budget_ms must be positive");
  return c;
}

inline EngineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path, 0, e.what());
  }
  return parse_config(j, std::filesystem::absolute(path).parent_path());
}

inline Fixtures load_fixtures(const EngineConfig& c) {
  KbSchema schema = KbSchema::defaults();
  if (!c.ontology.empty()) schema.ontology = load_ontology(c.ontology);
  for (const auto& [word, type] : c.type_aliases) schema.type_aliases[normalize(word)] = type;
  for (const auto& [a, b] : c.inverse_relations) {
    schema.inverse_relations[a] = b;
    schema.inverse_relations[b] = a;
  }
  std::vector<KnowledgeBase> bases;
  for (const auto& s : c.kb_snapshots) bases.push_back(load_snapshot(s.path, s.source));

  return Fixtures{merge(bases, c.source_priority, schema),
                  Index(load_corpus(c.corpus)),
                  load_templates(c.templates),
                  load_opinions(c.opinions),
                  load_stories(c.stories),
                  SentimentLexicon::from_json(c.sentiment_lexicon),
                  load_word_list(c.stopwords),
                  TopicTable::from_json(c.topics),
                  load_attribute_map(c.attribute_map),
                  c.weights.empty() ? Weights::defaults() : load_weights(c.weights)};
}

struct TurnResult {
  std::string reply;
  TurnRecord user_turn;
  TurnRecord system_turn;
  nlohmann::json debug;
  double latency_ms = 0.0;
};

struct Session {
  std::string session_id;
  DiscourseState state;
  std::int64_t created_at = 0;
  std::unique_ptr<std::ofstream> sink;
  std::mutex mutex;
};

inline std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

inline constexpr std::size_t kDebugCandidates = 5;

inline nlohmann::json to_json(const PolicyDecision& d) {
  nlohmann::json rels = nlohmann::json::array();
  for (auto r : d.preferred_relations) rels.push_back(std::string(to_string(r)));
  return {{"system_act", std::string(to_string(d.system_act))},
          {"preferred_relations", rels},
          {"must_answer", d.must_answer},
          {"execute_offer", d.execute_offer},
          {"follow_up_question", d.follow_up_question}};
}

inline nlohmann::json to_json(const Candidate& c) {
  return {{"text", c.utterance()},
          {"relation", std::string(to_string(c.relation))},
          {"dialogue_act", std::string(to_string(c.dialogue_act))},
          {"source", std::string(to_string(c.source))},
          {"content_key", c.content_key},
          {"features", c.features.to_map()},
          {"score", c.score}};
}

inline nlohmann::json salience_json(const DiscourseState& state, const KnowledgeBase& kb) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : state.salience) {
    const Entity* entity = kb.find(e.entity_id);
    out.push_back({{"entity_id", e.entity_id},
                   {"name", entity ? entity->name : e.entity_id},
                   {"last_mention_turn", e.last_mention_turn}});
  }
  return out;
}

class Engine {
 public:
  explicit Engine(EngineConfig config) : config_(std::move(config)), fixtures_(load_fixtures(config_)) {}
  Engine(EngineConfig config, Fixtures fixtures) : config_(std::move(config)), fixtures_(std::move(fixtures)) {}

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const EngineConfig& config() const { return config_; }
  const Fixtures& fixtures() const { return fixtures_; }

  // New session whose first turn is the opening prompt.
  std::string create_session() {
    auto s = std::make_shared<Session>();
    char id[32];
    std::snprintf(id, sizeof id, "s%06llu", static_cast<unsigned long long>(++counter_));
    s->session_id = id;
    s->created_at = now_ms();
    if (!config_.transcript_dir.empty()) {
      std::filesystem::create_directories(config_.transcript_dir);
      auto path = std::filesystem::path(config_.transcript_dir) / (s->session_id + ".jsonl");
      s->sink = std::make_unique<std::ofstream>(path, std::ios::trunc);
      if (!*s->sink) throw ConfigError("cannot write transcript: " + path.string());
    }
    TurnRecord open;
    open.index = 0;
    open.speaker = Speaker::system;
    const Template& t = fixtures_.templates.at("open.prompt");
    open.text = realize_template(t, {});
    open.dialogue_act = t.dialogue_act;
    open.source_used = ContentSource::template_;
    open.timestamp = s->created_at;
    append(*s, open);
    std::lock_guard lock(sessions_mutex_);
    sessions_.emplace(s->session_id, s);
    return s->session_id;
  }

  TurnResult post_user_turn(const std::string& session_id, const std::string& raw_text) {
    auto session = find(session_id);
    std::string text = collapse_whitespace(trim(raw_text));
    if (text.empty()) throw EmptyInput("empty user turn");
    std::lock_guard lock(session->mutex);
    auto start = std::chrono::steady_clock::now();
    DiscourseState& state = session->state;
    const KnowledgeBase& kb = fixtures_.kb;

    TurnRecord user;
    user.index = state.turns.size();
    user.speaker = Speaker::user;
    user.text = text;
    user.timestamp = now_ms();
    user.dialogue_act = classify_user_act(text, state);
    user.mentioned_entities = mention_ids(find_mentions(text, state, kb, fixtures_.stopwords));
    const Topic* topic = user.dialogue_act == DialogueAct::TOPIC_PROPOSAL
                             ? fixtures_.topics.match(topic_phrase(text))
                             : fixtures_.topics.match(text);
    if (topic && topic->key != state.topic) user.topic = topic->key;
    append(*session, user);

    PolicyDecision decision = select_system_act(user.dialogue_act, state);
    TurnContext ctx;
    ctx.user_text = text;
    ctx.user_act = user.dialogue_act;
    ctx.user_entities = user.mentioned_entities;
    if (state.topic) ctx.topic = fixtures_.topics.find(*state.topic);

    std::vector<Candidate> pool = gather_candidates(decision, ctx, state, fixtures_);
    if (pool.empty()) pool.push_back(reprompt(state));
    auto ranked = rank_pool(std::move(pool), fixtures_.weights, decision, state, fixtures_.feature_context());
    const Candidate& top = ranked.front();

    std::string body = top.text;
    if (top.source != ContentSource::search && top.focus_entity && established(state, *top.focus_entity)) {
      body = pronominalize(body, *top.focus_entity, state, kb);
    }

    TurnRecord system;
    system.index = state.turns.size();
    system.speaker = Speaker::system;
    system.text = top.follow_up ? body + " " + *top.follow_up : body;
    system.dialogue_act = top.dialogue_act;
    system.mentioned_entities = top.mentions;
    system.relation_used = top.relation;
    system.source_used = top.source;
    if (!top.content_key.empty()) system.content_keys.push_back(top.content_key);
    system.content_keys.insert(system.content_keys.end(), top.extra_keys.begin(), top.extra_keys.end());
    system.offer = top.offer;
    system.executed_offer = top.executes_offer;
    system.features = top.features.to_map();
    system.timestamp = std::max(now_ms(), user.timestamp);

    nlohmann::json candidates = nlohmann::json::array();
    for (std::size_t i = 0; i < ranked.size() && i < kDebugCandidates; ++i) candidates.push_back(to_json(ranked[i]));

    append(*session, system);
    double latency =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    TurnResult r;
    r.reply = system.text;
    r.user_turn = user;
    r.system_turn = system;
    r.latency_ms = latency;
    r.debug = {{"user_act", std::string(to_string(user.dialogue_act))},
               {"decision", to_json(decision)},
               {"candidates", candidates},
               {"selected", system.text},
               {"salience", salience_json(state, kb)},
               {"topic", state.topic ? nlohmann::json(*state.topic) : nlohmann::json(nullptr)},
               {"latency_ms", latency},
               {"within_budget", latency <= config_.turn_budget_ms}};
    return r;
  }

  std::vector<TurnRecord> transcript(const std::string& session_id) {
    auto s = find(session_id);
    std::lock_guard lock(s->mutex);
    return s->state.turns;
  }

  DiscourseState state(const std::string& session_id) {
    auto s = find(session_id);
    std::lock_guard lock(s->mutex);
    return s->state;
  }

  SessionMetrics metrics(const std::string& session_id) { return compute_metrics(transcript(session_id)); }

  bool has_session(const std::string& session_id) {
    std::lock_guard lock(sessions_mutex_);
    return sessions_.count(session_id) > 0;
  }

  void flush(const std::string& session_id) {
    auto s = find(session_id);
    std::lock_guard lock(s->mutex);
    if (s->sink) s->sink->flush();
  }

 private:
  std::shared_ptr<Session> find(const std::string& session_id) {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw UnknownSession("unknown session: " + session_id);
    return it->second;
  }

  void append(Session& s, const TurnRecord& t) {
    update_state(s.state, t, fixtures_.kb);
    if (s.sink) *s.sink << to_json(t).dump() << '\n';
  }

  // A pronoun is only used for an entity the system itself has mentioned
  // recently.
  static bool established(const DiscourseState& state, const std::string& entity_id) {
    std::size_t n = state.turns.size();
    for (std::size_t i = n > kAnaphoraWindow ? n - kAnaphoraWindow : 0; i < n; ++i) {
      const auto& t = state.turns[i];
      if (t.speaker != Speaker::system) continue;
      if (std::find(t.mentioned_entities.begin(), t.mentioned_entities.end(), entity_id) !=
          t.mentioned_entities.end()) {
        return true;
      }
    }
    return false;
  }

  Candidate reprompt(const DiscourseState& state) const {
    std::size_t prior = 0;
    for (const auto& t : state.turns) {
      if (t.dialogue_act == DialogueAct::REPROMPT) ++prior;
    }
    auto family = fixtures_.templates.family("reprompt.");
    if (family.empty()) throw Error("no reprompt templates");
    const Template& t = *family[prior % family.size()];
    RelationCandidate c;
    c.relation = DiscourseRelation::EXPANSION;
    c.dialogue_act = DialogueAct::REPROMPT;
    c.source = ContentSource::template_;
    c.text = realize_template(t, {});
    return Candidate(std::move(c));
  }

  EngineConfig config_;
  Fixtures fixtures_;
  std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::atomic<std::uint64_t> counter_{0};
};

// ---- line-oriented drivers ------------------------------------------------------

inline void print_debug(std::ostream& out, const nlohmann::json& debug) {
  out << "  act=" << debug["user_act"].get<std::string>()
      << " decision=" << debug["decision"]["system_act"].get<std::string>() << "\n";
  char buf[64];
  for (const auto& c : debug["candidates"]) {
    std::snprintf(buf, sizeof buf, "  %8.3f  %-11s %-10s ", c["score"].get<double>(),
                  c["relation"].get<std::string>().c_str(), c["source"].get<std::string>().c_str());
    out << buf << c["text"].get<std::string>() << "\n";
  }
  out << "  salience:";
  for (const auto& e : debug["salience"]) out << " " << e["entity_id"].get<std::string>();
  out << "\n";
}

// Interactive loop. "/debug" toggles the candidate table, "/quit" (or end of
// input) flushes the transcript and prints the session metrics.
inline SessionMetrics run_repl(Engine& engine, std::istream& in, std::ostream& out, bool debug = false) {
  std::string id = engine.create_session();
  out << "S: " << engine.transcript(id).front().text << "\n";
  std::string line;
  while (std::getline(in, line)) {
    std::string cmd = trim(line);
    if (cmd.empty()) continue;
    if (cmd == "/quit") break;
    if (cmd == "/debug") {
      debug = !debug;
      out << "(debug " << (debug ? "on" : "off") << ")\n";
      continue;
    }
    auto r = engine.post_user_turn(id, cmd);
    out << "S: " << r.reply << "\n";
    if (debug) print_debug(out, r.debug);
  }
  engine.flush(id);
  SessionMetrics m = engine.metrics(id);
  out << "metrics: " << to_json(m).dump() << "\n";
  return m;
}

// Batch mode: each non-empty, non-comment line of the script is a user turn.
inline std::vector<TurnResult> run_script(Engine& engine, std::istream& in, std::ostream& out,
                                          bool debug = false) {
  std::string id = engine.create_session();
  out << "S: " << engine.transcript(id).front().text << "\n";
  std::vector<TurnResult> results;
  std::string line;
  while (std::getline(in, line)) {
    std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    auto r = engine.post_user_turn(id, text);
    out << "U: " << text << "\n";
    out << "S: " << r.reply << "\n";
    if (debug) print_debug(out, r.debug);
    results.push_back(std::move(r));
  }
  engine.flush(id);
  return results;
}

}  // namespace relchat
