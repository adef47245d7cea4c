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

// Structured knowledge: entity snapshots loaded from JSON-lines files, merged
// across sources under a priority order, and queried by alias, attribute and
// relation. A KnowledgeBase is immutable once built.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "relchat/error.hpp"
#include "relchat/text.hpp"

namespace relchat {

struct Date {
  int year = 0;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;
};

using Scalar = std::variant<std::string, double, Date>;

inline std::string format_number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  std::ostringstream os;
  os.precision(15);
  os << v;
  return os.str();
}

inline std::string to_string(const Scalar& value) {
  struct Visitor {
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(double d) const { return format_number(d); }
    std::string operator()(const Date& d) const {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
      return buf;
    }
  };
  return std::visit(Visitor{}, value);
}

struct AttributeValue {
  Scalar value;
  std::string source;
  double confidence = 1.0;

  std::string text() const { return to_string(value); }
  std::optional<double> number() const {
    if (auto* d = std::get_if<double>(&value)) return *d;
    return std::nullopt;
  }
};

struct Edge {
  std::string relation;
  std::string target;

  auto operator<=>(const Edge&) const = default;
};

struct Entity {
  std::string id;
  std::string name;
  std::vector<std::string> aliases;
  std::vector<std::string> type_path;  // most specific first
  std::map<std::string, AttributeValue> attributes;
  // Values that lost a merge conflict, kept with their provenance.
  std::map<std::string, std::vector<AttributeValue>> shadow;
  std::vector<Edge> edges;
  std::string source;
  std::string description;
};

struct LinkResult {
  std::string entity_id;
  double score = 0.0;

  bool operator==(const LinkResult&) const = default;
};

struct Related {
  std::string relation;
  const Entity* entity = nullptr;
};

// Ontology and naming tables that accompany the entity data.
struct KbSchema {
  std::map<std::string, std::string> ontology;        // child type -> parent type
  std::map<std::string, std::string> type_aliases;    // normalized word -> type
  std::map<std::string, std::string> inverse_relations;

  static std::map<std::string, std::string> default_inverses() {
    std::map<std::string, std::string> inv = {{"actor", "actedIn"},
                                              {"director", "directed"},
                                              {"author", "wrote"},
                                              {"memberOf", "hasMember"}};
    std::map<std::string, std::string> both = inv;
    for (const auto& [a, b] : inv) both.emplace(b, a);
    return both;
  }

  static KbSchema defaults() {
    KbSchema s;
    s.inverse_relations = default_inverses();
    return s;
  }
};

// Splits "SportsTeam" into "sports team".
inline std::string type_words(std::string_view type) {
  std::string out;
  for (std::size_t i = 0; i < type.size(); ++i) {
    char c = type[i];
    if (is_upper(c) && i > 0 && !is_upper(type[i - 1])) out.push_back(' ');
    out.push_back(lower(c));
  }
  return out;
}

inline std::string display_attribute(std::string_view attribute) {
  return type_words(attribute);
}

inline void check_acyclic(const std::map<std::string, std::string>& ontology) {
  for (const auto& [start, _] : ontology) {
    std::set<std::string> seen{start};
    auto it = ontology.find(start);
    while (it != ontology.end()) {
      if (!seen.insert(it->second).second) {
        throw OntologyCycle("ontology cycle through type " + it->second);
      }
      it = ontology.find(it->second);
    }
  }
}

class KnowledgeBase {
 public:
  KnowledgeBase() : schema_(KbSchema::defaults()) {}

  // Takes ownership of the entities and builds the indexes. When
  // require_resolved is false, edges to unknown ids are recorded in
  // dangling() instead of raising DanglingEdge.
  KnowledgeBase(std::vector<Entity> entities, KbSchema schema, bool require_resolved)
      : schema_(std::move(schema)) {
    check_acyclic(schema_.ontology);
    for (auto& e : entities) {
      if (!sources_set_.count(e.source)) sources_set_.insert(e.source);
      std::string id = e.id;
      if (!entities_.emplace(id, std::move(e)).second) {
        throw DuplicateId("duplicate entity id: " + id);
      }
    }
    build_indexes(require_resolved);
  }

  const std::map<std::string, Entity>& entities() const { return entities_; }
  const std::set<std::string>& sources() const { return sources_set_; }
  const KbSchema& schema() const { return schema_; }
  const std::vector<std::pair<std::string, Edge>>& dangling() const { return dangling_; }
  bool empty() const { return entities_.empty(); }
  std::size_t size() const { return entities_.size(); }

  const Entity* find(const std::string& id) const {
    auto it = entities_.find(id);
    return it == entities_.end() ? nullptr : &it->second;
  }

  const Entity& at(const std::string& id) const {
    if (const Entity* e = find(id)) return *e;
    throw UnknownEntity("unknown entity: " + id);
  }

  // Entity ids whose alias normalizes to the given (already normalized) key.
  const std::vector<std::string>& ids_for_alias(const std::string& normalized) const {
    static const std::vector<std::string> kNone;
    auto it = alias_index_.find(normalized);
    return it == alias_index_.end() ? kNone : it->second;
  }

  const std::unordered_map<std::string, std::vector<std::string>>& alias_index() const {
    return alias_index_;
  }

  // The type itself followed by its ontology ancestors.
  std::vector<std::string> ancestors(const std::string& type) const {
    std::vector<std::string> chain{type};
    auto it = schema_.ontology.find(type);
    while (it != schema_.ontology.end()) {
      chain.push_back(it->second);
      it = schema_.ontology.find(it->second);
    }
    return chain;
  }

  std::size_t ontology_depth() const {
    std::size_t depth = 0;
    for (const auto& [type, _] : schema_.ontology) {
      depth = std::max(depth, ancestors(type).size() - 1);
    }
    return depth;
  }

  bool has_type(const Entity& e, const std::string& type) const {
    for (const auto& t : e.type_path) {
      for (const auto& a : ancestors(t)) {
        if (a == type) return true;
      }
    }
    return false;
  }

  bool is_person(const Entity& e) const { return has_type(e, "Person"); }

  bool is_plural(const Entity& e) const {
    if (auto it = e.attributes.find("plural"); it != e.attributes.end()) {
      std::string v = to_lower(it->second.text());
      if (v == "true" || v == "1" || v == "yes") return true;
    }
    return has_type(e, "Organization");
  }

  // "male", "female", or empty when unknown.
  std::string gender(const Entity& e) const {
    auto it = e.attributes.find("gender");
    if (it == e.attributes.end()) return {};
    return to_lower(it->second.text());
  }

  std::optional<std::string> type_for_word(std::string_view word) const {
    std::string key = normalize(word);
    auto it = type_aliases_.find(key);
    if (it == type_aliases_.end() && key.size() > 1 && key.back() == 's') {
      it = type_aliases_.find(key.substr(0, key.size() - 1));
    }
    if (it == type_aliases_.end()) return std::nullopt;
    return it->second;
  }

  std::string inverse(const std::string& relation) const {
    auto it = schema_.inverse_relations.find(relation);
    if (it != schema_.inverse_relations.end()) return it->second;
    if (!relation.empty() && relation.front() == '~') return relation.substr(1);
    return "~" + relation;
  }

  // Exact alias hits score 1.0; otherwise 1 - normalized edit distance over
  // aliases, dropping anything below kLinkThreshold. Sorted by score
  // descending, then id ascending.
  static constexpr double kLinkThreshold = 0.80;

  std::vector<LinkResult> link(std::string_view surface,
                               const std::optional<std::string>& type_hint = std::nullopt) const {
    std::string key = normalize(surface);
    if (key.empty()) return {};
    std::map<std::string, double> best;
    for (const auto& [alias, ids] : alias_index_) {
      double score = alias == key ? 1.0 : similarity(alias, key);
      if (score < kLinkThreshold) continue;
      for (const auto& id : ids) {
        auto& slot = best[id];
        slot = std::max(slot, score);
      }
    }
    std::vector<LinkResult> out;
    for (const auto& [id, score] : best) {
      if (type_hint && !has_type(at(id), *type_hint)) continue;
      out.push_back({id, score});
    }
    std::stable_sort(out.begin(), out.end(), [](const LinkResult& a, const LinkResult& b) {
      return a.score > b.score;
    });
    return out;
  }

  std::optional<AttributeValue> attribute(const std::string& id, const std::string& name) const {
    const Entity& e = at(id);
    auto it = e.attributes.find(name);
    if (it == e.attributes.end()) return std::nullopt;
    return it->second;
  }

  // Outgoing edges plus inverse edges from other entities, ordered by
  // (relation, target id), duplicates removed.
  std::vector<Related> related(const std::string& id,
                               const std::optional<std::string>& relation_filter = std::nullopt) const {
    const Entity& e = at(id);
    std::set<Edge> merged(e.edges.begin(), e.edges.end());
    if (auto it = incoming_.find(id); it != incoming_.end()) {
      merged.insert(it->second.begin(), it->second.end());
    }
    std::vector<Related> out;
    for (const auto& edge : merged) {
      if (relation_filter && edge.relation != *relation_filter) continue;
      out.push_back({edge.relation, &at(edge.target)});
    }
    return out;
  }

 private:
  void build_indexes(bool require_resolved) {
    for (auto& [id, e] : entities_) {
      if (e.type_path.empty()) throw Error("entity without type_path: " + id);
      for (const auto& alias : e.aliases) {
        std::string key = normalize(alias);
        if (key.empty()) continue;
        auto& ids = alias_index_[key];
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
      }
      for (const auto& t : e.type_path) {
        for (const auto& a : ancestors(t)) type_aliases_.emplace(normalize(type_words(a)), a);
      }
    }
    for (const auto& [child, parent] : schema_.ontology) {
      type_aliases_.emplace(normalize(type_words(child)), child);
      type_aliases_.emplace(normalize(type_words(parent)), parent);
    }
    for (const auto& [word, type] : schema_.type_aliases) type_aliases_[normalize(word)] = type;
    for (auto& [_, ids] : alias_index_) std::sort(ids.begin(), ids.end());

    for (const auto& [id, e] : entities_) {
      for (const auto& edge : e.edges) {
        if (!entities_.count(edge.target)) {
          if (require_resolved) {
            throw DanglingEdge("edge " + id + " -[" + edge.relation + "]-> " + edge.target +
                               " does not resolve");
          }
          dangling_.emplace_back(id, edge);
          continue;
        }
        incoming_[edge.target].push_back({inverse(edge.relation), id});
      }
    }
  }

  std::map<std::string, Entity> entities_;
  std::set<std::string> sources_set_;
  KbSchema schema_;
  std::unordered_map<std::string, std::vector<std::string>> alias_index_;
  std::unordered_map<std::string, std::string> type_aliases_;
  std::unordered_map<std::string, std::vector<Edge>> incoming_;
  std::vector<std::pair<std::string, Edge>> dangling_;
};

namespace detail {

inline std::optional<Date> parse_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  Date d;
  auto num = [&](std::size_t pos, std::size_t len, int& out) {
    auto res = std::from_chars(s.data() + pos, s.data() + pos + len, out);
    return res.ec == std::errc() && res.ptr == s.data() + pos + len;
  };
  if (!num(0, 4, d.year) || !num(5, 2, d.month) || !num(8, 2, d.day)) return std::nullopt;
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) return std::nullopt;
  return d;
}

inline Scalar scalar_from_json(const nlohmann::json& j, const std::string& origin,
                               std::size_t line) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (auto d = parse_iso_date(s)) return *d;
    return s;
  }
  if (j.is_boolean()) return std::string(j.get<bool>() ? "true" : "false");
  throw ParseError(origin, line, "attribute value must be a string or number");
}

inline std::vector<std::string> string_list(const nlohmann::json& j, const char* field,
                                            const std::string& origin, std::size_t line) {
  std::vector<std::string> out;
  if (!j.is_array()) throw ParseError(origin, line, std::string(field) + " must be an array");
  for (const auto& item : j) {
    if (!item.is_string()) {
      throw ParseError(origin, line, std::string(field) + " must contain strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace detail

inline Entity parse_entity_record(const std::string& text, const std::string& source_id,
                                  const std::string& origin, std::size_t line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(origin, line, e.what());
  }
  if (!j.is_object()) throw ParseError(origin, line, "record must be a JSON object");
  auto require = [&](const char* field) -> const nlohmann::json& {
    if (!j.contains(field)) throw ParseError(origin, line, std::string("missing ") + field);
    return j.at(field);
  };

  Entity e;
  const auto& id = require("id");
  const auto& name = require("name");
  if (!id.is_string() || id.get<std::string>().empty()) {
    throw ParseError(origin, line, "id must be a non-empty string");
  }
  if (!name.is_string()) throw ParseError(origin, line, "name must be a string");
  e.id = id.get<std::string>();
  e.name = name.get<std::string>();
  e.type_path = detail::string_list(require("type_path"), "type_path", origin, line);
  if (e.type_path.empty()) throw ParseError(origin, line, "type_path must be non-empty");
  if (j.contains("aliases")) e.aliases = detail::string_list(j["aliases"], "aliases", origin, line);
  if (std::find(e.aliases.begin(), e.aliases.end(), e.name) == e.aliases.end()) {
    e.aliases.insert(e.aliases.begin(), e.name);
  }
  if (j.contains("description")) {
    if (!j["description"].is_string()) throw ParseError(origin, line, "description must be a string");
    e.description = j["description"].get<std::string>();
  }
  if (j.contains("attributes")) {
    const auto& attrs = j["attributes"];
    if (!attrs.is_object()) throw ParseError(origin, line, "attributes must be an object");
    for (const auto& [attr_name, raw] : attrs.items()) {
      AttributeValue v;
      v.source = source_id;
      if (raw.is_object()) {
        if (!raw.contains("value")) throw ParseError(origin, line, "attribute without value");
        v.value = detail::scalar_from_json(raw["value"], origin, line);
        if (raw.contains("confidence")) {
          if (!raw["confidence"].is_number()) throw ParseError(origin, line, "confidence must be a number");
          v.confidence = raw["confidence"].get<double>();
        }
      } else {
        v.value = detail::scalar_from_json(raw, origin, line);
      }
      if (!(v.confidence >= 0.0 && v.confidence <= 1.0)) {
        throw ParseError(origin, line, "confidence outside [0,1]");
      }
      e.attributes.emplace(attr_name, std::move(v));
    }
  }
  if (j.contains("edges")) {
    const auto& edges = j["edges"];
    if (!edges.is_array()) throw ParseError(origin, line, "edges must be an array");
    for (const auto& edge : edges) {
      if (!edge.is_array() || edge.size() != 2 || !edge[0].is_string() || !edge[1].is_string()) {
        throw ParseError(origin, line, "edge must be [relation, target_id]");
      }
      e.edges.push_back({edge[0].get<std::string>(), edge[1].get<std::string>()});
    }
  }
  e.source = source_id;
  return e;
}

// Parses one snapshot. Edges may point outside the snapshot; they are kept as
// dangling until merge().
inline KnowledgeBase parse_snapshot(std::istream& in, const std::string& source_id,
                                    const std::string& origin = "<snapshot>") {
  std::vector<Entity> entities;
  std::set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    Entity e = parse_entity_record(text, source_id, origin, line);
    if (!ids.insert(e.id).second) {
      throw DuplicateId(origin + ":" + std::to_string(line) + ": duplicate id " + e.id);
    }
    entities.push_back(std::move(e));
  }
  return KnowledgeBase(std::move(entities), KbSchema::defaults(), false);
}

inline KnowledgeBase load_snapshot(const std::string& path, const std::string& source_id) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open snapshot: " + path);
  return parse_snapshot(in, source_id, path);
}

inline std::map<std::string, std::string> load_ontology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open ontology: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path, 0, e.what());
  }
  std::map<std::string, std::string> ontology;
  for (const auto& [child, parent] : j.items()) {
    if (!parent.is_string()) throw ParseError(path, 0, "ontology parent must be a string");
    ontology.emplace(child, parent.get<std::string>());
  }
  check_acyclic(ontology);
  return ontology;
}

// Merges partial bases. Entities with the same id are combined; for each
// attribute the value from the highest-priority source wins, ties broken by
// the lexicographically smallest value text, and every losing value is kept
// as a shadow. The result is independent of the order of `bases`.
inline KnowledgeBase merge(const std::vector<KnowledgeBase>& bases,
                           const std::vector<std::string>& priority,
                           KbSchema schema = KbSchema::defaults()) {
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < priority.size(); ++i) rank.emplace(priority[i], i);
  for (const auto& base : bases) {
    for (const auto& src : base.sources()) {
      if (!rank.count(src)) throw UnknownSource("source not in priority list: " + src);
    }
  }

  std::map<std::string, std::vector<const Entity*>> by_id;
  for (const auto& base : bases) {
    for (const auto& [id, e] : base.entities()) by_id[id].push_back(&e);
  }

  auto record_key = [&](const Entity* e) {
    return std::tie(rank.at(e->source), e->name, e->description, e->aliases, e->type_path);
  };

  std::vector<Entity> merged;
  merged.reserve(by_id.size());
  for (auto& [id, records] : by_id) {
    std::stable_sort(records.begin(), records.end(), [&](const Entity* a, const Entity* b) {
      return record_key(a) < record_key(b);
    });
    const Entity& top = *records.front();
    Entity out;
    out.id = id;
    out.name = top.name;
    out.type_path = top.type_path;
    out.source = top.source;
    for (const Entity* r : records) {
      if (out.description.empty()) out.description = r->description;
      for (const auto& alias : r->aliases) {
        if (std::find(out.aliases.begin(), out.aliases.end(), alias) == out.aliases.end()) {
          out.aliases.push_back(alias);
        }
      }
    }
    std::set<Edge> edges;
    std::map<std::string, std::vector<AttributeValue>> values;
    for (const Entity* r : records) {
      edges.insert(r->edges.begin(), r->edges.end());
      for (const auto& [name, v] : r->attributes) values[name].push_back(v);
      for (const auto& [name, vs] : r->shadow) {
        values[name].insert(values[name].end(), vs.begin(), vs.end());
      }
    }
    out.edges.assign(edges.begin(), edges.end());
    for (auto& [name, vs] : values) {
      std::sort(vs.begin(), vs.end(), [&](const AttributeValue& a, const AttributeValue& b) {
        auto ka = std::make_tuple(rank.at(a.source), a.text(), a.confidence);
        auto kb = std::make_tuple(rank.at(b.source), b.text(), b.confidence);
        return ka < kb;
      });
      out.attributes.emplace(name, vs.front());
      if (vs.size() > 1) out.shadow.emplace(name, std::vector<AttributeValue>(vs.begin() + 1, vs.end()));
    }
    merged.push_back(std::move(out));
  }
  return KnowledgeBase(std::move(merged), std::move(schema), true);
}

// Canonical JSON-lines rendering; two bases with equal content dump to equal
// bytes.
inline std::string dump(const KnowledgeBase& kb) {
  std::string out;
  for (const auto& [id, e] : kb.entities()) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["name"] = e.name;
    j["aliases"] = e.aliases;
    j["type_path"] = e.type_path;
    auto value_json = [](const AttributeValue& v) {
      nlohmann::ordered_json a;
      a["value"] = v.text();
      a["source"] = v.source;
      a["confidence"] = v.confidence;
      return a;
    };
    nlohmann::ordered_json attrs = nlohmann::ordered_json::object();
    for (const auto& [name, v] : e.attributes) attrs[name] = value_json(v);
    j["attributes"] = attrs;
    nlohmann::ordered_json shadow = nlohmann::ordered_json::object();
    for (const auto& [name, vs] : e.shadow) {
      for (const auto& v : vs) shadow[name].push_back(value_json(v));
    }
    j["shadow"] = shadow;
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (const auto& edge : e.edges) edges.push_back({edge.relation, edge.target});
    j["edges"] = edges;
    j["source"] = e.source;
    j["description"] = e.description;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace relchat
