#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semidx {

enum class NodeId : std::uint32_t {};

inline std::uint32_t to_underlying(NodeId id) { return static_cast<std::uint32_t>(id); }

enum class QuestionType { single, multi };

// Dialog annotations carried as `?token` suffixes on a concept line.
struct Annotations {
  std::optional<QuestionType> question;
  bool optional = false;
  bool negatable = false;
  std::optional<std::string> default_child;
  // Pass-through payloads (`?alt=...`, `?note=...`); no behavior attached.
  std::vector<std::pair<std::string, std::string>> extras;

  QuestionType question_type() const { return question.value_or(QuestionType::single); }
  bool empty() const {
    return !question && !optional && !negatable && !default_child && extras.empty();
  }
  std::string to_string() const;

  friend bool operator==(const Annotations&, const Annotations&) = default;
};

// Parses the `?single ?default=x` form produced by Annotations::to_string().
Annotations parse_annotations(std::string_view text);

struct HierarchyNode {
  NodeId id{};
  std::optional<NodeId> parent;
  std::string concept_name;
  std::vector<NodeId> children;
  Annotations annotations;
};

// A tree of concept-labelled nodes. The same concept may label many nodes.
// Structural rules (sibling uniqueness, acyclic dependency graph) are checked
// by validate(), not enforced on mutation.
class ConceptHierarchy {
 public:
  ConceptHierarchy() = default;
  ConceptHierarchy(std::string axis_name, std::string title, std::string root_concept,
                   Annotations root_annotations = {});

  const std::string& axis_name() const { return axis_name_; }
  const std::string& title() const { return title_; }
  void set_title(std::string t) { title_ = std::move(t); }
  void set_axis_name(std::string a) { axis_name_ = std::move(a); }

  NodeId root() const { return root_; }
  bool contains(NodeId id) const { return nodes_.count(id) != 0; }
  const HierarchyNode& node(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }

  NodeId add_child(NodeId parent, std::string concept_name, Annotations annotations = {});
  // Adds a node with a caller-chosen id (used when restoring persisted state).
  void add_child_with_id(NodeId parent, NodeId id, std::string concept_name, Annotations annotations);
  // Removes `id` and its whole subtree; returns the removed ids in preorder.
  std::vector<NodeId> remove_subtree(NodeId id);

  std::vector<NodeId> preorder() const;
  std::vector<NodeId> subtree(NodeId id) const;
  std::vector<NodeId> nodes_of(std::string_view concept_name) const;
  bool has_concept(std::string_view concept_name) const;
  // Distinct concepts in order of first preorder occurrence.
  std::vector<std::string> concepts() const;

  std::vector<std::string> path_of(NodeId id) const;
  std::optional<NodeId> find_path(std::span<const std::string> path) const;
  std::optional<NodeId> child_with_concept(NodeId parent, std::string_view concept_name) const;
  std::size_t depth(NodeId id) const;
  bool is_ancestor_or_self(NodeId ancestor, NodeId id) const;

  NodeId next_id() const { return next_id_; }
  void set_next_id(NodeId id) { next_id_ = id; }

  // Renders back to the indented input grammar.
  std::string to_text() const;

 private:
  HierarchyNode& mutable_node(NodeId id);

  std::string axis_name_;
  std::string title_;
  NodeId root_{};
  NodeId next_id_{};
  std::map<NodeId, HierarchyNode> nodes_;
};

// Line-based input grammar: optional `axis <NAME> "<title>"` header, then one
// concept per line indented by two spaces per depth, with optional `?token`
// annotations. Validation is not run here.
ConceptHierarchy parse_hierarchy(std::string_view text);

// Splits a `a > b > c` node path into trimmed concept names.
std::vector<std::string> parse_node_path(std::string_view text);
std::string format_node_path(std::span<const std::string> path);

struct DependencyGraph {
  std::set<std::string> nodes;
  // (child concept, parent concept)
  std::set<std::pair<std::string, std::string>> edges;

  bool contains(std::string_view concept_name) const { return nodes.count(std::string(concept_name)) != 0; }
  std::vector<std::string> successors(std::string_view concept_name) const;
};

DependencyGraph dependency_graph(const ConceptHierarchy& h);

struct SiblingViolation {
  NodeId parent{};
  std::string concept_name;
};

struct ValidationReport {
  std::vector<SiblingViolation> sibling_violations;
  // Each cycle as C1 -> ... -> C1 (first name repeated at the end).
  std::vector<std::vector<std::string>> cycles;

  bool ok() const { return sibling_violations.empty() && cycles.empty(); }
  std::vector<std::string> to_lines(const ConceptHierarchy& h) const;
};

ValidationReport validate(const ConceptHierarchy& h);

// All nodes having a child labelled `concept`, in preorder.
std::vector<NodeId> parents(const ConceptHierarchy& h, std::string_view concept_name);

// A directed path of length >= 1 leads from `a` to `b`.
bool is_more_specific(const DependencyGraph& g, std::string_view a, std::string_view b);

// `a` itself plus every concept more specific than it.
std::set<std::string> more_specific_closure(const DependencyGraph& g, std::string_view a);

}  // namespace semidx
