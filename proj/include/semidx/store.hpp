#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "semidx/episode.hpp"
#include "semidx/indexer.hpp"
#include "semidx/multiaxial.hpp"

struct sqlite3;

namespace semidx {

struct StoreOptions {
  // Record the concept-name path of every instance so it can be remapped.
  bool store_paths = true;
};

struct InstanceHit {
  EpisodeRef episode;
  InstanceRecord record;

  friend bool operator==(const InstanceHit&, const InstanceHit&) = default;
};

struct OrphanRecord {
  EpisodeRef episode;
  InstanceRecord record;
  std::uint64_t axis_version = 0;
};

struct RemapReport {
  std::size_t rewritten = 0;
  std::size_t unchanged = 0;
  std::size_t orphaned = 0;
  // No path stored, or the stored key is not the node key its path named:
  // left verbatim.
  std::size_t flagged = 0;
  std::uint64_t new_version = 0;
};

// Relational persistence of indexed axes, d-concept sets, episodes and cases
// in one SQLite file. All member functions are safe to call from several
// threads; writes are serialized.
class Store {
 public:
  // `location` is a directory (the database file is created inside it) or a
  // path ending in .db / .sqlite.
  explicit Store(const std::filesystem::path& location, StoreOptions options = {});
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  static constexpr int schema_version = 1;

  const std::filesystem::path& file() const { return file_; }

  // Catalog. Registering an existing axis replaces it and bumps the version.
  std::uint64_t register_axis(const IndexedHierarchy& ix);
  bool has_axis(const std::string& axis) const;
  std::vector<std::string> axes() const;
  // Throws NotFoundError for unknown axes.
  IndexedHierarchy load_axis(const std::string& axis) const;
  std::uint64_t axis_version(const std::string& axis) const;
  // Axis, version and rendered index of every axis, plus d-concept set
  // names. Byte-stable across reopen.
  std::string catalog_text() const;

  void put_dconcepts(const std::string& name, const std::string& source);
  std::optional<std::string> dconcepts(const std::string& name) const;
  std::vector<std::string> dconcept_sets() const;

  // Validates every record against the catalog. Generates an id when empty,
  // stamps the current time when the timestamp is empty and fills in paths.
  // Returns the episode as stored.
  Episode put_episode(Episode e);
  std::optional<Episode> get_episode(const EpisodeRef& ref) const;
  std::vector<Episode> episodes_with_id(const std::string& id) const;
  std::vector<EpisodeRef> episode_refs() const;
  std::size_t episode_count() const;

  // Non-orphaned records whose key the query key unifies into.
  std::vector<InstanceHit> query_by_key(const std::string& axis, const Key& k) const;
  // Non-orphaned records at or below some node of the concept: the union of
  // node-key queries. Unlike a query by the concept key it cannot pick up
  // records from unrelated subtrees.
  std::vector<InstanceHit> query_by_concept(const std::string& axis, const std::string& concept_name) const;
  // Some ancestor-or-self of the node, found by walking parent pointers,
  // has a key in inst(concept_key).
  bool ancestor_check(const std::string& axis, const Key& node_key, const Key& concept_key) const;
  // Episodes where some descriptor matches the affirmed, non-orphaned
  // bindings.
  std::vector<EpisodeRef> query_multiaxial(const MultiaxialExpression& expr,
                                           MatchMode mode = MatchMode::descriptor_as_query) const;

  // Replaces the axis by `new_index` and rewrites every record of the axis
  // by resolving its stored path there. The change set must have been made
  // against the cataloged version.
  RemapReport remap_instances(const std::string& axis, const ChangeSet& changes, const IndexedHierarchy& new_index);
  std::vector<OrphanRecord> orphaned(const std::string& axis) const;

  std::string add_case(Case c);
  std::optional<Case> get_case(const std::string& id) const;
  std::vector<Case> cases() const;

 private:
  struct Catalog;

  void exec(const char* sql) const;
  void create_schema();
  const Catalog& catalog(const std::string& axis) const;
  void write_axis(const IndexedHierarchy& ix);
  void validate_record(InstanceRecord& r) const;
  std::vector<Episode> select_episodes(const std::string& where, const std::vector<std::string>& args) const;

  std::filesystem::path file_;
  StoreOptions options_;
  sqlite3* db_ = nullptr;
  mutable std::recursive_mutex mu_;
  mutable std::map<std::string, std::shared_ptr<const Catalog>> cache_;
};

}  // namespace semidx
