#pragma once

// Random episodes over indexed axes for the store and maintenance suites.

#include <cstdio>

#include "generators.hpp"
#include "semidx/episode.hpp"
#include "semidx/indexer.hpp"

namespace gen {

inline std::string timestamp(Rng& rng) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "2026-%02zu-%02zuT%02zu:%02zu:%02zuZ", uniform(rng, 1, 12), uniform(rng, 1, 28),
                uniform(rng, 0, 23), uniform(rng, 0, 59), uniform(rng, 0, 59));
  return buf;
}

// Mostly node keys; sometimes a concept key, which may carry variables.
inline semidx::InstanceRecord record(Rng& rng, const semidx::IndexedHierarchy& ix, double concept_p = 0.15) {
  semidx::InstanceRecord r;
  r.axis = ix.axis();
  if (chance(rng, concept_p)) {
    auto it = ix.concept_keys.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(uniform(rng, 0, ix.concept_keys.size() - 1)));
    r.node_key = it->second;
  } else {
    auto nodes = ix.hierarchy.preorder();
    r.node_key = ix.node_key(nodes[uniform(rng, 0, nodes.size() - 1)]);
  }
  r.polarity = chance(rng, 0.15) ? semidx::Polarity::negated : semidx::Polarity::affirmed;
  if (chance(rng, 0.1)) r.value = std::to_string(uniform(rng, 0, 100));
  return r;
}

inline semidx::Episode episode(Rng& rng, const std::vector<const semidx::IndexedHierarchy*>& axes,
                               std::size_t max_records, double concept_p = 0.15) {
  semidx::Episode e;
  e.timestamp = timestamp(rng);
  e.subject = "patient-" + std::to_string(uniform(rng, 1, 20));
  const std::size_t n = uniform(rng, 1, max_records);
  for (std::size_t i = 0; i < n; ++i) e.instances.push_back(record(rng, *axes[uniform(rng, 0, axes.size() - 1)], concept_p));
  return e;
}

}  // namespace gen
