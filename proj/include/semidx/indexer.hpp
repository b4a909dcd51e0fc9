#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semidx/hierarchy.hpp"
#include "semidx/keys.hpp"

namespace semidx {

// A concept hierarchy with a node key on every node and a concept key on
// every concept. Per-node counters are kept so maintenance can resume the
// indexing without reusing numbers.
struct IndexedHierarchy {
  ConceptHierarchy hierarchy;
  std::map<std::string, Key> concept_keys;
  std::map<NodeId, Key> node_keys;
  std::map<NodeId, std::uint64_t> counters;
  // Concepts in the order the selection step picked them.
  std::vector<std::string> indexing_order;
  // Catalog version this index was loaded from; 0 when never persisted.
  std::uint64_t version = 0;

  const std::string& axis() const { return hierarchy.axis_name(); }
  const Key& concept_key(std::string_view concept_name) const;
  const Key& node_key(NodeId id) const;
  std::optional<NodeId> node_with_key(const Key& k) const;
  // The node whose key has `k` as an instance (unique on a correct index).
  std::optional<NodeId> node_for_instance(const Key& k) const;
  std::optional<std::string> concept_with_key(const Key& k) const;
};

// Runs the indexing loop (selection, derivation, generalization, expansion,
// addition) over a validated hierarchy. Throws ValidationError when the
// hierarchy breaks the sibling rule or its dependency graph has a cycle.
IndexedHierarchy index_hierarchy(const ConceptHierarchy& h);

struct CorrectnessViolation {
  // "keys", "1", "2a", "2b", "2c", "S1", "S2", "S3"
  std::string clause;
  std::string detail;
};

struct CorrectnessReport {
  std::vector<CorrectnessViolation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(std::string_view clause) const;
  std::vector<std::string> to_lines() const;
};

CorrectnessReport check_correctness(const IndexedHierarchy& ix);

struct ChangeEntry {
  enum class Kind { add, mod, del };
  Kind kind = Kind::add;
  std::string concept_name;
  std::optional<Key> old_key;
  std::optional<Key> new_key;

  friend bool operator==(const ChangeEntry&, const ChangeEntry&) = default;
};

struct ChangeSet {
  std::string axis;
  std::uint64_t base_version = 0;
  std::vector<ChangeEntry> entries;

  std::size_t count(ChangeEntry::Kind kind) const;
  // `ADD <concept> <key>` / `MOD <concept> <old> <new>` / `DEL <concept> <key>`,
  // concept names double-quoted.
  std::string to_text() const;
};

ChangeSet parse_change_set(std::string_view text);

struct MaintenanceResult {
  IndexedHierarchy index;
  ChangeSet changes;
  NodeId node{};
};

// Inserts a leaf labelled `concept` below `parent`. A brand-new concept only
// receives fresh keys; an existing concept has itself and everything more
// specific re-indexed while all other keys stay verbatim.
MaintenanceResult insert_node(const IndexedHierarchy& ix, NodeId parent, const std::string& concept_name,
                              Annotations annotations = {});

// Removes a node with its subtree. No surviving key changes.
MaintenanceResult delete_node(const IndexedHierarchy& ix, NodeId node);

// One line per concept in indexing order:
// `(<concept-key> "<name>" (<child-concept-key> ...))`.
std::string render_indexed(const IndexedHierarchy& ix);

struct RenderedEntry {
  Key key;
  std::string name;
  std::vector<Key> children;

  friend bool operator==(const RenderedEntry&, const RenderedEntry&) = default;
};

std::vector<RenderedEntry> parse_rendered(std::string_view text);
std::string render_entries(const std::vector<RenderedEntry>& entries);

}  // namespace semidx
