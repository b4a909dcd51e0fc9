#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semidx/keys.hpp"

namespace semidx {

struct AxisBinding {
  std::string axis;
  Key key;

  std::string to_string() const { return "(" + axis + key.to_string() + ")"; }

  friend bool operator==(const AxisBinding&, const AxisBinding&) = default;
  friend auto operator<=>(const AxisBinding&, const AxisBinding&) = default;
};

// Conjunction of keys from distinct axes describing one complex concept.
struct MultiaxialDescriptor {
  std::vector<AxisBinding> bindings;

  std::string to_string() const;

  friend bool operator==(const MultiaxialDescriptor&, const MultiaxialDescriptor&) = default;
};

struct MultiaxialExpression {
  std::vector<MultiaxialDescriptor> descriptors;

  std::string to_string() const;

  friend bool operator==(const MultiaxialExpression&, const MultiaxialExpression&) = default;
};

// The node keys observed at one point in time. Several bindings may share an
// axis.
struct Situation {
  std::vector<AxisBinding> bindings;
  std::string source;

  bool has_axis(std::string_view axis) const;
  // Sorted, duplicate-free copy of the bindings.
  std::vector<AxisBinding> normalized() const;
};

// Situation text uses the expression syntax; all groups are pooled, so an
// axis may be bound several times across groups.
Situation parse_situation(std::string_view text, const std::set<std::string>* known_axes = nullptr);

// Which side of a binding pair has to unify into the other.
enum class MatchMode {
  descriptor_as_query,  // partially_unifiable(descriptor key, situation key)
  situation_as_query,   // partially_unifiable(situation key, descriptor key)
};

bool is_valid_axis_name(std::string_view name);

// `[(Q[0,0]),(L[0,1])],[(Q[0,1])]`. With `known_axes`, axes outside the set
// are rejected.
MultiaxialExpression parse_multiaxial(std::string_view text, const std::set<std::string>* known_axes = nullptr);
MultiaxialDescriptor parse_descriptor(std::string_view text, const std::set<std::string>* known_axes = nullptr);

// Every binding of `d` finds some binding on the same axis in the situation
// that it unifies with.
bool descriptor_matches(const MultiaxialDescriptor& d, std::span<const AxisBinding> situation,
                        MatchMode mode = MatchMode::descriptor_as_query);
bool descriptor_matches(const MultiaxialDescriptor& d, const Situation& s,
                        MatchMode mode = MatchMode::descriptor_as_query);

// Some descriptor of the expression matches.
bool expression_matches(const MultiaxialExpression& e, std::span<const AxisBinding> situation,
                        MatchMode mode = MatchMode::descriptor_as_query);

// Every axis of d1 occurs in d2 and the d1 key unifies into the d2 key there.
bool descriptor_subsumes(const MultiaxialDescriptor& d1, const MultiaxialDescriptor& d2);

}  // namespace semidx
