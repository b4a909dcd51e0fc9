#pragma once

// JSON forms of the domain types, shared by the store and the HTTP service.
// Keys always travel in their canonical text form.

#include <json.hpp>

#include "semidx/episode.hpp"
#include "semidx/indexer.hpp"
#include "semidx/multiaxial.hpp"

namespace semidx {

using json = nlohmann::json;

void to_json(json& j, const Key& k);
void from_json(const json& j, Key& k);

void to_json(json& j, const AxisBinding& b);
void from_json(const json& j, AxisBinding& b);

void to_json(json& j, const Situation& s);
void from_json(const json& j, Situation& s);

void to_json(json& j, const InstanceRecord& r);
void from_json(const json& j, InstanceRecord& r);

void to_json(json& j, const Episode& e);
void from_json(const json& j, Episode& e);

void to_json(json& j, const EpisodeRef& r);
void from_json(const json& j, EpisodeRef& r);

void to_json(json& j, const Case& c);
void from_json(const json& j, Case& c);

void to_json(json& j, const ChangeSet& cs);

// Full indexing state: nodes with ids, keys and counters.
json index_to_json(const IndexedHierarchy& ix);
IndexedHierarchy index_from_json(const json& j);

}  // namespace semidx
