#include "semidx/indexer.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_map>

#include "semidx/error.hpp"
#include "text.hpp"

namespace semidx {

const Key& IndexedHierarchy::concept_key(std::string_view concept_name) const {
  auto it = concept_keys.find(std::string(concept_name));
  if (it == concept_keys.end()) throw NotFoundError("no key for concept \"" + std::string(concept_name) + "\"");
  return it->second;
}

const Key& IndexedHierarchy::node_key(NodeId id) const {
  auto it = node_keys.find(id);
  if (it == node_keys.end()) throw NotFoundError("no key for node " + std::to_string(to_underlying(id)));
  return it->second;
}

std::optional<NodeId> IndexedHierarchy::node_with_key(const Key& k) const {
  for (const auto& [id, key] : node_keys) {
    if (key == k) return id;
  }
  return std::nullopt;
}

std::optional<NodeId> IndexedHierarchy::node_for_instance(const Key& k) const {
  for (const auto& [id, key] : node_keys) {
    if (is_instance(k, key)) return id;
  }
  return std::nullopt;
}

std::optional<std::string> IndexedHierarchy::concept_with_key(const Key& k) const {
  for (const auto& [c, key] : concept_keys) {
    if (key == k) return c;
  }
  return std::nullopt;
}

namespace {

bool overlaps_any(const Key& k, const std::map<std::string, Key>& existing) {
  return std::any_of(existing.begin(), existing.end(),
                     [&](const auto& kv) { return instances_overlap(k, kv.second); });
}

// Appends numbers until the key shares no instance with an existing concept
// key: constants 0..N are tried at the new last position, and if all of them
// collide a further position is opened.
Key repair_collisions(Key g, const std::map<std::string, Key>& existing) {
  if (!overlaps_any(g, existing)) return g;
  const std::uint64_t limit = existing.size();
  while (true) {
    for (std::uint64_t c = 0; c <= limit; ++c) {
      Key candidate = g.appended(KeyElement::constant(c));
      if (!overlaps_any(candidate, existing)) return candidate;
    }
    g = g.appended(KeyElement::constant(0));
  }
}

// Keys every concept still lacking one. Requires all other keys in place.
void resume_indexing(IndexedHierarchy& ix) {
  const ConceptHierarchy& h = ix.hierarchy;
  const std::vector<NodeId> order = h.preorder();
  std::vector<std::string> pending;
  for (const auto& c : h.concepts()) {
    if (!ix.concept_keys.count(c)) pending.push_back(c);
  }
  std::map<std::string, std::vector<NodeId>> nodes_by_concept;
  for (NodeId id : order) nodes_by_concept[h.node(id).concept_name].push_back(id);

  while (!pending.empty()) {
    auto selectable = [&](const std::string& concept_name) {
      for (NodeId n : nodes_by_concept[concept_name]) {
        auto p = h.node(n).parent;
        if (!p || !ix.node_keys.count(*p)) return false;
      }
      return true;
    };
    auto it = std::find_if(pending.begin(), pending.end(), selectable);
    if (it == pending.end()) {
      throw Error("internal error: no concept selectable for indexing; dependency graph must be cyclic");
    }
    const std::string concept_name = *it;
    pending.erase(it);

    const auto& nodes = nodes_by_concept[concept_name];
    std::vector<Key> candidates;
    candidates.reserve(nodes.size());
    for (NodeId n : nodes) {
      NodeId p = *h.node(n).parent;
      std::uint64_t& counter = ix.counters[p];
      candidates.push_back(ix.node_keys.at(p).appended(KeyElement::constant(counter)));
      ++counter;
    }
    Key concept_key = repair_collisions(generalize(candidates), ix.concept_keys);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      ix.node_keys[nodes[i]] = expand(candidates[i], concept_key);
      ix.counters.try_emplace(nodes[i], 0);
    }
    ix.concept_keys.emplace(concept_name, concept_key);
    ix.indexing_order.push_back(concept_name);
  }
}

void require_valid(const ConceptHierarchy& h) {
  ValidationReport report = validate(h);
  if (report.ok()) return;
  std::string msg = "invalid concept hierarchy";
  for (const auto& line : report.to_lines(h)) msg += "; " + line;
  throw ValidationError(msg);
}

std::string describe(const ConceptHierarchy& h, NodeId id) { return format_node_path(h.path_of(id)); }

}  // namespace

IndexedHierarchy index_hierarchy(const ConceptHierarchy& h) {
  require_valid(h);
  IndexedHierarchy ix;
  ix.hierarchy = h;
  const Key root_key{KeyElement::constant(0)};
  const NodeId root = h.root();
  ix.node_keys.emplace(root, root_key);
  ix.counters.emplace(root, 0);
  ix.concept_keys.emplace(h.node(root).concept_name, root_key);
  ix.indexing_order.push_back(h.node(root).concept_name);
  resume_indexing(ix);
  return ix;
}

std::size_t CorrectnessReport::count(std::string_view clause) const {
  return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                [&](const auto& v) { return v.clause == clause; }));
}

std::vector<std::string> CorrectnessReport::to_lines() const {
  std::vector<std::string> out;
  for (const auto& v : violations) out.push_back("VIOLATION " + v.clause + ": " + v.detail);
  return out;
}

CorrectnessReport check_correctness(const IndexedHierarchy& ix) {
  CorrectnessReport report;
  const ConceptHierarchy& h = ix.hierarchy;
  auto add = [&](std::string clause, std::string detail) {
    report.violations.push_back({std::move(clause), std::move(detail)});
  };

  const auto order = h.preorder();
  for (NodeId id : order) {
    if (!ix.node_keys.count(id)) add("keys", "node " + describe(h, id) + " has no node key");
  }
  for (const auto& c : h.concepts()) {
    if (!ix.concept_keys.count(c)) add("keys", "concept \"" + c + "\" has no concept key");
  }
  for (const auto& [c, k] : ix.concept_keys) {
    if (!h.has_concept(c)) add("keys", "concept key " + k.to_string() + " for absent concept \"" + c + "\"");
  }

  // 1: concept keys pairwise instance-disjoint.
  for (auto a = ix.concept_keys.begin(); a != ix.concept_keys.end(); ++a) {
    for (auto b = std::next(a); b != ix.concept_keys.end(); ++b) {
      if (instances_overlap(a->second, b->second)) {
        add("1", "concepts \"" + a->first + "\" " + a->second.to_string() + " and \"" + b->first + "\" " +
                     b->second.to_string() + " share instances");
      }
    }
  }

  std::unordered_map<Key, std::vector<NodeId>> nodes_by_key;
  for (NodeId id : order) {
    auto it = ix.node_keys.find(id);
    if (it != ix.node_keys.end()) nodes_by_key[it->second].push_back(id);
  }

  for (NodeId id : order) {
    auto kit = ix.node_keys.find(id);
    if (kit == ix.node_keys.end()) continue;
    const Key& key = kit->second;
    const auto& n = h.node(id);
    // 2a
    auto cit = ix.concept_keys.find(n.concept_name);
    if (cit != ix.concept_keys.end() && !is_instance(key, cit->second)) {
      add("2a", "node " + describe(h, id) + " key " + key.to_string() + " is not an instance of " +
                    cit->second.to_string());
    }
    // 2b
    if (n.parent) {
      auto pit = ix.node_keys.find(*n.parent);
      if (pit != ix.node_keys.end()) {
        const Key& pk = pit->second;
        if (pk.size() >= key.size() || initial_key(key, pk.size()) != pk) {
          add("2b", "node " + describe(h, id) + " key " + key.to_string() + " does not extend parent key " +
                        pk.to_string());
        }
        // S2: parent node key unifies into the child node key.
        if (!partially_unifiable(pk, key)) {
          add("S2", "parent key " + pk.to_string() + " not partially unifiable with child key " + key.to_string());
        }
        // S3: same at concept level.
        auto pc = ix.concept_keys.find(h.node(*n.parent).concept_name);
        if (pc != ix.concept_keys.end() && cit != ix.concept_keys.end() &&
            !partially_unifiable(pc->second, cit->second)) {
          add("S3", "concept key " + pc->second.to_string() + " of \"" + h.node(*n.parent).concept_name +
                        "\" not partially unifiable with " + cit->second.to_string() + " of \"" + n.concept_name + "\"");
        }
      }
    }
    // 2c: no initial key belongs to a node off the root path.
    for (std::size_t j = 1; j <= key.size(); ++j) {
      auto hit = nodes_by_key.find(initial_key(key, j));
      if (hit == nodes_by_key.end()) continue;
      for (NodeId other : hit->second) {
        if (!h.is_ancestor_or_self(other, id)) {
          add("2c", "initial key " + initial_key(key, j).to_string() + " of node " + describe(h, id) +
                        " is the key of off-path node " + describe(h, other));
        }
      }
    }
  }

  // S1: node keys pairwise instance-disjoint.
  std::map<std::size_t, std::vector<std::pair<NodeId, const Key*>>> by_length;
  for (const auto& [id, k] : ix.node_keys) by_length[k.size()].emplace_back(id, &k);
  for (const auto& [len, group] : by_length) {
    for (std::size_t a = 0; a < group.size(); ++a) {
      for (std::size_t b = a + 1; b < group.size(); ++b) {
        if (instances_overlap(*group[a].second, *group[b].second)) {
          add("S1", "node keys " + group[a].second->to_string() + " and " + group[b].second->to_string() +
                        " share instances");
        }
      }
    }
  }
  return report;
}

std::size_t ChangeSet::count(ChangeEntry::Kind kind) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [&](const auto& e) { return e.kind == kind; }));
}

namespace {

using detail::quote;
using detail::read_quoted;
using detail::skip_spaces;

Key read_key(std::string_view text, std::size_t& pos) {
  std::size_t close = text.find(']', pos);
  if (pos >= text.size() || text[pos] != '[' || close == std::string_view::npos) {
    throw ParseError("expected key", pos);
  }
  Key k = parse_key(text.substr(pos, close - pos + 1));
  pos = close + 1;
  return k;
}

}  // namespace

std::string ChangeSet::to_text() const {
  std::string out;
  for (const auto& e : entries) {
    switch (e.kind) {
      case ChangeEntry::Kind::add:
        out += "ADD " + quote(e.concept_name) + " " + e.new_key->to_string() + "\n";
        break;
      case ChangeEntry::Kind::mod:
        out += "MOD " + quote(e.concept_name) + " " + e.old_key->to_string() + " " + e.new_key->to_string() + "\n";
        break;
      case ChangeEntry::Kind::del:
        out += "DEL " + quote(e.concept_name) + " " + e.old_key->to_string() + "\n";
        break;
    }
  }
  return out;
}

ChangeSet parse_change_set(std::string_view text) {
  ChangeSet cs;
  std::size_t pos = 0;
  while (true) {
    skip_spaces(text, pos);
    if (pos >= text.size()) break;
    std::string_view tag = text.substr(pos, 3);
    pos += 3;
    skip_spaces(text, pos);
    ChangeEntry e;
    e.concept_name = read_quoted(text, pos);
    skip_spaces(text, pos);
    if (tag == "ADD") {
      e.kind = ChangeEntry::Kind::add;
      e.new_key = read_key(text, pos);
    } else if (tag == "DEL") {
      e.kind = ChangeEntry::Kind::del;
      e.old_key = read_key(text, pos);
    } else if (tag == "MOD") {
      e.kind = ChangeEntry::Kind::mod;
      e.old_key = read_key(text, pos);
      skip_spaces(text, pos);
      e.new_key = read_key(text, pos);
    } else {
      throw ParseError("unknown change tag '" + std::string(tag) + "'", pos);
    }
    cs.entries.push_back(std::move(e));
  }
  return cs;
}

namespace {

ChangeSet diff_concepts(const IndexedHierarchy& before, const IndexedHierarchy& after) {
  ChangeSet cs;
  cs.axis = before.axis();
  cs.base_version = before.version;
  for (const auto& c : after.indexing_order) {
    const Key& nk = after.concept_keys.at(c);
    auto old = before.concept_keys.find(c);
    if (old == before.concept_keys.end()) {
      cs.entries.push_back({ChangeEntry::Kind::add, c, std::nullopt, nk});
    } else if (old->second != nk) {
      cs.entries.push_back({ChangeEntry::Kind::mod, c, old->second, nk});
    }
  }
  for (const auto& c : before.indexing_order) {
    if (!after.concept_keys.count(c)) {
      cs.entries.push_back({ChangeEntry::Kind::del, c, before.concept_keys.at(c), std::nullopt});
    }
  }
  return cs;
}

}  // namespace

MaintenanceResult insert_node(const IndexedHierarchy& ix, NodeId parent, const std::string& concept_name,
                              Annotations annotations) {
  if (!ix.hierarchy.contains(parent)) throw NotFoundError("unknown parent node " + std::to_string(to_underlying(parent)));
  if (concept_name.empty()) throw ValidationError("concept name must not be empty");
  if (ix.hierarchy.child_with_concept(parent, concept_name)) {
    throw ValidationError("node " + describe(ix.hierarchy, parent) + " already has a child \"" + concept_name + "\"");
  }
  const bool existing = ix.hierarchy.has_concept(concept_name);

  MaintenanceResult result;
  IndexedHierarchy& next = result.index;
  next = ix;
  result.node = next.hierarchy.add_child(parent, concept_name, std::move(annotations));
  next.counters[result.node] = 0;

  DependencyGraph g = dependency_graph(next.hierarchy);
  ValidationReport report = validate(next.hierarchy);
  if (!report.cycles.empty()) {
    std::string msg = "insertion induces a dependency cycle";
    for (const auto& line : report.to_lines(next.hierarchy)) msg += "; " + line;
    throw ValidationError(msg);
  }

  if (existing) {
    const std::set<std::string> affected = more_specific_closure(g, concept_name);
    for (const auto& c : affected) next.concept_keys.erase(c);
    std::erase_if(next.indexing_order, [&](const std::string& c) { return affected.count(c) != 0; });
    for (NodeId id : next.hierarchy.preorder()) {
      if (affected.count(next.hierarchy.node(id).concept_name)) {
        next.node_keys.erase(id);
        next.counters[id] = 0;
      }
    }
  }
  resume_indexing(next);
  result.changes = diff_concepts(ix, next);
  return result;
}

MaintenanceResult delete_node(const IndexedHierarchy& ix, NodeId node) {
  if (!ix.hierarchy.contains(node)) throw NotFoundError("unknown node " + std::to_string(to_underlying(node)));
  if (node == ix.hierarchy.root()) throw ValidationError("the root node cannot be deleted");
  MaintenanceResult result;
  IndexedHierarchy& next = result.index;
  next = ix;
  result.node = node;
  for (NodeId id : next.hierarchy.remove_subtree(node)) {
    next.node_keys.erase(id);
    next.counters.erase(id);
  }
  std::erase_if(next.indexing_order, [&](const std::string& c) {
    if (next.hierarchy.has_concept(c)) return false;
    next.concept_keys.erase(c);
    return true;
  });
  result.changes = diff_concepts(ix, next);
  return result;
}

std::string render_indexed(const IndexedHierarchy& ix) {
  const ConceptHierarchy& h = ix.hierarchy;
  std::vector<RenderedEntry> entries;
  for (const auto& c : ix.indexing_order) {
    RenderedEntry e{ix.concept_keys.at(c), c, {}};
    std::set<std::string> seen;
    for (NodeId n : h.nodes_of(c)) {
      for (NodeId child : h.node(n).children) {
        const auto& cc = h.node(child).concept_name;
        if (seen.insert(cc).second) e.children.push_back(ix.concept_keys.at(cc));
      }
    }
    entries.push_back(std::move(e));
  }
  return render_entries(entries);
}

std::string render_entries(const std::vector<RenderedEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += "(" + e.key.to_string() + " " + quote(e.name);
    if (!e.children.empty()) {
      out += " (";
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += ' ';
        out += e.children[i].to_string();
      }
      out += ')';
    }
    out += ")\n";
  }
  return out;
}

std::vector<RenderedEntry> parse_rendered(std::string_view text) {
  std::vector<RenderedEntry> out;
  std::size_t pos = 0;
  while (true) {
    skip_spaces(text, pos);
    if (pos >= text.size()) break;
    if (text[pos] != '(') throw ParseError("expected '('", pos);
    ++pos;
    skip_spaces(text, pos);
    RenderedEntry e{read_key(text, pos), {}, {}};
    skip_spaces(text, pos);
    e.name = read_quoted(text, pos);
    skip_spaces(text, pos);
    if (pos < text.size() && text[pos] == '(') {
      ++pos;
      while (true) {
        skip_spaces(text, pos);
        if (pos < text.size() && text[pos] == ')') {
          ++pos;
          break;
        }
        e.children.push_back(read_key(text, pos));
      }
      skip_spaces(text, pos);
    }
    if (pos >= text.size() || text[pos] != ')') throw ParseError("expected ')'", pos);
    ++pos;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace semidx
