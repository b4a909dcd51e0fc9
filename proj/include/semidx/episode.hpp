#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semidx/keys.hpp"
#include "semidx/multiaxial.hpp"

namespace semidx {

enum class Polarity { affirmed, negated };

std::string to_string(Polarity p);
Polarity parse_polarity(std::string_view text);

// One instantiated node: the most specific node key reached on an axis.
struct InstanceRecord {
  std::string axis;
  Key node_key;
  Polarity polarity = Polarity::affirmed;
  std::optional<std::string> value;
  // Concept names from the root down to the node; what makes remapping
  // after re-indexing unambiguous.
  std::vector<std::string> path;

  friend bool operator==(const InstanceRecord&, const InstanceRecord&) = default;
};

// A concrete event at one point in time. (id, timestamp) is the identity.
struct Episode {
  std::string id;
  // ISO-8601 UTC with seconds, e.g. 2026-03-01T09:30:00Z.
  std::string timestamp;
  std::string subject;
  std::optional<std::string> t_label;
  std::optional<std::string> c_label;
  std::optional<std::string> l_label;
  std::vector<InstanceRecord> instances;

  // Affirmed bindings only.
  Situation situation() const;

  friend bool operator==(const Episode&, const Episode&) = default;
};

struct EpisodeRef {
  std::string id;
  std::string timestamp;

  friend bool operator==(const EpisodeRef&, const EpisodeRef&) = default;
  friend auto operator<=>(const EpisodeRef&, const EpisodeRef&) = default;
};

// Problem episodes, solution and an optional assessment.
struct Case {
  std::string id;
  std::vector<EpisodeRef> problem;
  std::vector<InstanceRecord> solution;
  std::optional<std::string> assessment;
  std::optional<double> outcome_score;

  friend bool operator==(const Case&, const Case&) = default;
};

bool is_valid_timestamp(std::string_view ts);
std::string utc_now();

}  // namespace semidx
