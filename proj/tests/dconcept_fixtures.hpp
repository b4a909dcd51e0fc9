#pragma once

// Random d-concept sets and situations over the axes Q, L and T.

#include "generators.hpp"
#include "semidx/multiaxial.hpp"

namespace gen {

// Random d-concept source: a tree over up to `max` concepts with random
// conditions over three small axes.
inline std::string dconcept_source(Rng& rng, std::size_t max) {
  static const char* axes[] = {"Q", "L", "T"};
  const std::size_t n = uniform(rng, 1, max);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    out += "dconcept \"d" + std::to_string(i) + "\"";
    if (i > 0) out += " parent \"d" + std::to_string(uniform(rng, 0, i - 1)) + "\"";
    out += ":\n";
    const std::size_t conds = uniform(rng, 0, 2);
    for (std::size_t j = 0; j < conds; ++j) {
      semidx::MultiaxialDescriptor d;
      const std::size_t first = uniform(rng, 0, 2);
      d.bindings.push_back({axes[first], key(rng, 3, 3, 0.2)});
      if (chance(rng, 0.25)) d.bindings.push_back({axes[(first + uniform(rng, 1, 2)) % 3], key(rng, 3, 3, 0.2)});
      out += (chance(rng, 0.8) ? "  requires " : "  excludes ") + d.to_string() + "\n";
    }
    if (i > 1 && chance(rng, 0.15)) {
      // Parents and references always point at lower numbers, so
      // definitions cannot be cyclic.
      out += (chance(rng, 0.5) ? "  requires \"d" : "  excludes \"d") + std::to_string(uniform(rng, 0, i - 1)) + "\"\n";
    }
  }
  return out;
}

inline semidx::Situation situation(Rng& rng) {
  static const char* axes[] = {"Q", "L", "T"};
  semidx::Situation s;
  const std::size_t n = uniform(rng, 0, 4);
  for (std::size_t i = 0; i < n; ++i) s.bindings.push_back({axes[uniform(rng, 0, 2)], key(rng, 4, 3, 0.1)});
  return s;
}

}  // namespace gen
