#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semidx/indexer.hpp"
#include "semidx/multiaxial.hpp"

namespace semidx {

// A deduced concept: a predicate over situations given by key conditions.
// A concept's effective conditions are its own plus those of every ancestor.
struct DConcept {
  std::string name;
  std::optional<std::string> parent;
  // Each descriptor must match.
  std::vector<MultiaxialDescriptor> required;
  // No descriptor may match.
  std::vector<MultiaxialDescriptor> excluded;
  // Other d-concepts that must (or must not) be valid as well.
  std::vector<std::string> required_concepts;
  std::vector<std::string> excluded_concepts;
  Key concept_key;
};

class DConceptHierarchy {
 public:
  const std::string& name() const { return name_; }
  const std::string& root() const { return root_; }
  bool contains(std::string_view name) const { return concepts_.count(std::string(name)) != 0; }
  const DConcept& get(std::string_view name) const;
  // Declaration order.
  const std::vector<std::string>& names() const { return order_; }
  std::vector<std::string> children(std::string_view name) const;
  std::vector<std::string> ancestors_or_self(std::string_view name) const;
  const IndexedHierarchy& index() const { return index_; }
  std::size_t size() const { return order_.size(); }

  std::string to_text() const;

 private:
  friend DConceptHierarchy parse_dconcepts(std::string_view, const std::set<std::string>*);

  std::string name_ = "D";
  std::string root_;
  std::vector<std::string> order_;
  std::map<std::string, DConcept> concepts_;
  IndexedHierarchy index_;
};

// One block per concept:
//   dconcept "<name>" [parent "<name>"]:
//     requires <multiaxial-expr> | "<dconcept>"
//     excludes <multiaxial-expr> | "<dconcept>"
// Every group of an expression is a condition of its own. The result is
// indexed like any other concept hierarchy. Throws ValidationError on cyclic
// definitions, duplicate names or a missing or second root.
DConceptHierarchy parse_dconcepts(std::string_view text, const std::set<std::string>* known_axes = nullptr);

// Asked when a condition names an axis the situation says nothing about.
// Returning nullopt keeps the closed-world answer (no match).
using UnresolvedCondition =
    std::function<std::optional<bool>(const std::string& dconcept, const MultiaxialDescriptor& condition)>;

struct InferenceOptions {
  MatchMode mode = MatchMode::descriptor_as_query;
  UnresolvedCondition ask;
};

bool is_valid(const DConceptHierarchy& h, std::string_view name, const Situation& s,
              const InferenceOptions& opts = {});

// Over the finite base: wherever `cj` is valid, `ci` is valid too.
bool more_general_than(const DConceptHierarchy& h, std::string_view ci, std::string_view cj,
                       std::span<const Situation> base, const InferenceOptions& opts = {});

// Valid concepts none of whose children is valid, found top-down from the
// root without visiting below invalid concepts. Declaration order.
std::vector<std::string> infer_most_specific(const DConceptHierarchy& h, const Situation& s,
                                             const InferenceOptions& opts = {});

// `c` covers no negative and is more general than every peer that also
// covers no negative, judged over positives and negatives together.
bool check_maximally_general(const DConceptHierarchy& h, std::string_view c, std::span<const Situation> positives,
                             std::span<const Situation> negatives, std::span<const std::string> peers,
                             const InferenceOptions& opts = {});

}  // namespace semidx
