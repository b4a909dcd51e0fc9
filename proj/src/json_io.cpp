#include "semidx/json_io.hpp"

#include "semidx/error.hpp"

namespace semidx {

namespace {

template <typename T>
void put_optional(json& j, const char* name, const std::optional<T>& v) {
  if (v) j[name] = *v;
}

template <typename T>
void get_optional(const json& j, const char* name, std::optional<T>& v) {
  if (auto it = j.find(name); it != j.end() && !it->is_null()) v = it->get<T>();
}

const json& field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw Error(std::string("missing field '") + name + "'");
  return *it;
}

}  // namespace

void to_json(json& j, const Key& k) { j = k.to_string(); }
void from_json(const json& j, Key& k) { k = parse_key(j.get<std::string>()); }

void to_json(json& j, const AxisBinding& b) { j = json{{"axis", b.axis}, {"key", b.key}}; }
void from_json(const json& j, AxisBinding& b) {
  b.axis = field(j, "axis").get<std::string>();
  b.key = field(j, "key").get<Key>();
}

void to_json(json& j, const Situation& s) {
  j = json{{"bindings", s.bindings}};
  if (!s.source.empty()) j["source"] = s.source;
}
void from_json(const json& j, Situation& s) {
  if (j.is_string()) {
    s = parse_situation(j.get<std::string>());
    return;
  }
  s.bindings = field(j, "bindings").get<std::vector<AxisBinding>>();
  s.source = j.value("source", "");
}

void to_json(json& j, const InstanceRecord& r) {
  j = json{{"axis", r.axis}, {"key", r.node_key}, {"polarity", to_string(r.polarity)}};
  put_optional(j, "value", r.value);
  if (!r.path.empty()) j["path"] = r.path;
}
void from_json(const json& j, InstanceRecord& r) {
  r.axis = field(j, "axis").get<std::string>();
  r.node_key = field(j, "key").get<Key>();
  r.polarity = parse_polarity(j.value("polarity", "affirmed"));
  get_optional(j, "value", r.value);
  r.path = j.value("path", std::vector<std::string>{});
}

void to_json(json& j, const Episode& e) {
  j = json{{"id", e.id}, {"ts", e.timestamp}, {"subject", e.subject}, {"instances", e.instances}};
  put_optional(j, "t", e.t_label);
  put_optional(j, "c", e.c_label);
  put_optional(j, "l", e.l_label);
}
void from_json(const json& j, Episode& e) {
  e.id = field(j, "id").get<std::string>();
  e.timestamp = j.value("ts", "");
  e.subject = j.value("subject", "");
  get_optional(j, "t", e.t_label);
  get_optional(j, "c", e.c_label);
  get_optional(j, "l", e.l_label);
  e.instances = field(j, "instances").get<std::vector<InstanceRecord>>();
}

void to_json(json& j, const EpisodeRef& r) { j = json{{"id", r.id}, {"ts", r.timestamp}}; }
void from_json(const json& j, EpisodeRef& r) {
  r.id = field(j, "id").get<std::string>();
  r.timestamp = field(j, "ts").get<std::string>();
}

void to_json(json& j, const Case& c) {
  j = json{{"id", c.id}, {"problem", c.problem}, {"solution", c.solution}};
  put_optional(j, "assessment", c.assessment);
  put_optional(j, "outcome_score", c.outcome_score);
}
void from_json(const json& j, Case& c) {
  c.id = j.value("id", "");
  c.problem = field(j, "problem").get<std::vector<EpisodeRef>>();
  c.solution = j.value("solution", std::vector<InstanceRecord>{});
  get_optional(j, "assessment", c.assessment);
  get_optional(j, "outcome_score", c.outcome_score);
}

void to_json(json& j, const ChangeSet& cs) {
  json entries = json::array();
  for (const auto& e : cs.entries) {
    json x{{"concept", e.concept_name}};
    switch (e.kind) {
      case ChangeEntry::Kind::add: x["op"] = "ADD"; break;
      case ChangeEntry::Kind::mod: x["op"] = "MOD"; break;
      case ChangeEntry::Kind::del: x["op"] = "DEL"; break;
    }
    put_optional(x, "old", e.old_key);
    put_optional(x, "new", e.new_key);
    entries.push_back(std::move(x));
  }
  j = json{{"axis", cs.axis}, {"base_version", cs.base_version}, {"entries", entries}, {"text", cs.to_text()}};
}

json index_to_json(const IndexedHierarchy& ix) {
  const ConceptHierarchy& h = ix.hierarchy;
  json nodes = json::array();
  for (NodeId id : h.preorder()) {
    const HierarchyNode& n = h.node(id);
    json x{{"id", to_underlying(id)}, {"concept", n.concept_name}};
    if (n.parent) x["parent"] = to_underlying(*n.parent);
    if (!n.annotations.empty()) x["annotations"] = n.annotations.to_string();
    if (auto k = ix.node_keys.find(id); k != ix.node_keys.end()) x["key"] = k->second;
    if (auto c = ix.counters.find(id); c != ix.counters.end()) x["counter"] = c->second;
    nodes.push_back(std::move(x));
  }
  json concept_keys = json::object();
  for (const auto& [c, k] : ix.concept_keys) concept_keys[c] = k;
  return json{{"axis", h.axis_name()},
              {"title", h.title()},
              {"next_id", to_underlying(h.next_id())},
              {"nodes", nodes},
              {"concept_keys", concept_keys},
              {"indexing_order", ix.indexing_order},
              {"version", ix.version}};
}

IndexedHierarchy index_from_json(const json& j) {
  const json& nodes = field(j, "nodes");
  if (!nodes.is_array() || nodes.empty()) throw Error("index state without nodes");
  const json& root = nodes.front();
  if (root.contains("parent") || root.at("id").get<std::uint32_t>() != 0) throw Error("index state has no root first");
  IndexedHierarchy ix;
  ix.hierarchy = ConceptHierarchy(field(j, "axis").get<std::string>(), j.value("title", ""),
                                  field(root, "concept").get<std::string>(),
                                  parse_annotations(root.value("annotations", "")));
  for (const json& n : nodes) {
    NodeId id{n.at("id").get<std::uint32_t>()};
    if (n.contains("parent")) {
      ix.hierarchy.add_child_with_id(NodeId{n.at("parent").get<std::uint32_t>()}, id,
                                     field(n, "concept").get<std::string>(),
                                     parse_annotations(n.value("annotations", "")));
    }
    if (n.contains("key")) ix.node_keys.emplace(id, n.at("key").get<Key>());
    if (n.contains("counter")) ix.counters.emplace(id, n.at("counter").get<std::uint64_t>());
  }
  ix.hierarchy.set_next_id(NodeId{j.value("next_id", to_underlying(ix.hierarchy.next_id()))});
  for (const auto& [c, k] : field(j, "concept_keys").items()) ix.concept_keys.emplace(c, k.get<Key>());
  ix.indexing_order = j.value("indexing_order", std::vector<std::string>{});
  ix.version = j.value("version", std::uint64_t{0});
  return ix;
}

}  // namespace semidx
