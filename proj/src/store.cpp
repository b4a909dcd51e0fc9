#include "semidx/store.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>

#include "semidx/dconcepts.hpp"
#include "semidx/error.hpp"
#include "semidx/json_io.hpp"
#include "text.hpp"

namespace semidx {

namespace {

class Stmt {
 public:
  Stmt(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &st_, nullptr) != SQLITE_OK) {
      throw Error(std::string("store: ") + sqlite3_errmsg(db));
    }
  }
  ~Stmt() { sqlite3_finalize(st_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& bind(int i, const std::string& v) {
    check(sqlite3_bind_text(st_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
    return *this;
  }
  Stmt& bind(int i, std::int64_t v) {
    check(sqlite3_bind_int64(st_, i, v));
    return *this;
  }
  Stmt& bind(int i, std::uint64_t v) { return bind(i, static_cast<std::int64_t>(v)); }
  Stmt& bind(int i, int v) { return bind(i, static_cast<std::int64_t>(v)); }
  Stmt& bind(int i, double v) {
    check(sqlite3_bind_double(st_, i, v));
    return *this;
  }
  template <typename T>
  Stmt& bind(int i, const std::optional<T>& v) {
    if (v) return bind(i, *v);
    check(sqlite3_bind_null(st_, i));
    return *this;
  }

  // True while rows are available.
  bool step() {
    int rc = sqlite3_step(st_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw Error(std::string("store: ") + sqlite3_errmsg(db_));
  }
  void run() {
    while (step()) {
    }
  }

  bool is_null(int c) const { return sqlite3_column_type(st_, c) == SQLITE_NULL; }
  std::string text(int c) const {
    auto p = reinterpret_cast<const char*>(sqlite3_column_text(st_, c));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(st_, c))) : std::string();
  }
  std::optional<std::string> opt_text(int c) const { return is_null(c) ? std::nullopt : std::optional(text(c)); }
  std::int64_t integer(int c) const { return sqlite3_column_int64(st_, c); }
  double real(int c) const { return sqlite3_column_double(st_, c); }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) throw Error(std::string("store: ") + sqlite3_errmsg(db_));
  }

  sqlite3* db_;
  sqlite3_stmt* st_ = nullptr;
};

class Transaction {
 public:
  explicit Transaction(sqlite3* db) : db_(db) { run("BEGIN IMMEDIATE"); }
  ~Transaction() {
    if (!done_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void commit() {
    run("COMMIT");
    done_ = true;
  }

 private:
  void run(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "unknown error";
      sqlite3_free(err);
      throw Error("store: " + msg);
    }
  }

  sqlite3* db_;
  bool done_ = false;
};

const char* kSchema = R"sql(
CREATE TABLE meta(key TEXT PRIMARY KEY, value TEXT NOT NULL);
CREATE TABLE axes(
  axis TEXT PRIMARY KEY,
  version INTEGER NOT NULL,
  title TEXT NOT NULL,
  rendered_index TEXT NOT NULL,
  state_json TEXT NOT NULL);
CREATE TABLE nodes(
  axis TEXT NOT NULL,
  node_key TEXT NOT NULL,
  concept TEXT NOT NULL,
  parent_key TEXT,
  depth INTEGER NOT NULL,
  path_json TEXT NOT NULL,
  PRIMARY KEY(axis, node_key));
CREATE TABLE dconcept_sets(name TEXT PRIMARY KEY, source TEXT NOT NULL);
CREATE TABLE episodes(
  id TEXT NOT NULL,
  ts TEXT NOT NULL,
  subject TEXT NOT NULL,
  t_label TEXT,
  c_label TEXT,
  l_label TEXT,
  PRIMARY KEY(id, ts));
CREATE TABLE instances(
  episode_id TEXT NOT NULL,
  ts TEXT NOT NULL,
  seq INTEGER NOT NULL,
  axis TEXT NOT NULL,
  node_key TEXT NOT NULL,
  key_len INTEGER NOT NULL,
  polarity TEXT NOT NULL,
  value TEXT,
  path_json TEXT,
  axis_version INTEGER NOT NULL,
  orphaned INTEGER NOT NULL DEFAULT 0,
  PRIMARY KEY(episode_id, ts, seq),
  FOREIGN KEY(episode_id, ts) REFERENCES episodes(id, ts));
CREATE INDEX instances_by_axis ON instances(axis, orphaned, key_len);
CREATE TABLE cases(
  id TEXT PRIMARY KEY,
  problem_episode_ids_json TEXT NOT NULL,
  solution_json TEXT NOT NULL,
  assessment_text TEXT,
  outcome_score REAL);
)sql";

std::string padded(const char* prefix, std::int64_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%06lld", prefix, static_cast<long long>(n));
  return buf;
}

std::vector<std::string> path_from_json(const std::optional<std::string>& text) {
  if (!text || text->empty()) return {};
  return json::parse(*text).get<std::vector<std::string>>();
}

std::optional<std::string> path_to_json(const std::vector<std::string>& path) {
  if (path.empty()) return std::nullopt;
  return json(path).dump();
}

}  // namespace

struct Store::Catalog {
  IndexedHierarchy index;
  std::map<Key, std::optional<Key>> parent_of;
  std::set<Key> concept_keys;
};

Store::Store(const std::filesystem::path& location, StoreOptions options) : options_(options) {
  const auto ext = location.extension();
  try {
    if (ext == ".db" || ext == ".sqlite") {
      if (location.has_parent_path()) std::filesystem::create_directories(location.parent_path());
      file_ = location;
    } else {
      std::filesystem::create_directories(location);
      file_ = location / "semidx.db";
    }
  } catch (const std::filesystem::filesystem_error& e) {
    throw Error("cannot use store location " + location.string() + ": " + e.code().message());
  }
  if (sqlite3_open_v2(file_.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw Error("cannot open store " + file_.string() + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  try {
    exec("PRAGMA foreign_keys = ON");
    bool fresh = true;
    {
      Stmt st(db_, "SELECT count(*) FROM sqlite_master WHERE type='table' AND name='meta'");
      st.step();
      fresh = st.integer(0) == 0;
    }
    if (fresh) {
      create_schema();
    } else {
      Stmt st(db_, "SELECT value FROM meta WHERE key='schema_version'");
      std::string found = st.step() ? st.text(0) : "<missing>";
      if (found != std::to_string(schema_version)) {
        throw Error("incompatible store schema version '" + found + "' (expected " +
                    std::to_string(schema_version) + ")");
      }
    }
  } catch (...) {
    sqlite3_close(db_);
    db_ = nullptr;
    throw;
  }
}

Store::~Store() {
  if (db_) sqlite3_close(db_);
}

void Store::exec(const char* sql) const {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw Error("store: " + msg);
  }
}

void Store::create_schema() {
  Transaction tx(db_);
  exec(kSchema);
  Stmt(db_, "INSERT INTO meta(key, value) VALUES('schema_version', ?)").bind(1, std::to_string(schema_version)).run();
  tx.commit();
}

const Store::Catalog& Store::catalog(const std::string& axis) const {
  if (auto it = cache_.find(axis); it != cache_.end()) return *it->second;
  Stmt st(db_, "SELECT version, state_json FROM axes WHERE axis = ?");
  st.bind(1, axis);
  if (!st.step()) throw NotFoundError("unknown axis " + axis);
  auto cat = std::make_shared<Catalog>();
  cat->index = index_from_json(json::parse(st.text(1)));
  cat->index.version = static_cast<std::uint64_t>(st.integer(0));
  Stmt nodes(db_, "SELECT node_key, parent_key FROM nodes WHERE axis = ?");
  nodes.bind(1, axis);
  while (nodes.step()) {
    std::optional<Key> parent;
    if (!nodes.is_null(1)) parent = parse_key(nodes.text(1));
    cat->parent_of.emplace(parse_key(nodes.text(0)), parent);
  }
  for (const auto& [c, k] : cat->index.concept_keys) cat->concept_keys.insert(k);
  return *cache_.emplace(axis, std::move(cat)).first->second;
}

void Store::write_axis(const IndexedHierarchy& ix) {
  const ConceptHierarchy& h = ix.hierarchy;
  Stmt(db_, "INSERT OR REPLACE INTO axes(axis, version, title, rendered_index, state_json) VALUES(?,?,?,?,?)")
      .bind(1, ix.axis())
      .bind(2, ix.version)
      .bind(3, h.title())
      .bind(4, render_indexed(ix))
      .bind(5, index_to_json(ix).dump())
      .run();
  Stmt(db_, "DELETE FROM nodes WHERE axis = ?").bind(1, ix.axis()).run();
  for (NodeId id : h.preorder()) {
    const HierarchyNode& n = h.node(id);
    std::optional<std::string> parent;
    if (n.parent) parent = ix.node_key(*n.parent).to_string();
    Stmt one(db_, "INSERT INTO nodes(axis, node_key, concept, parent_key, depth, path_json) VALUES(?,?,?,?,?,?)");
    one.bind(1, ix.axis())
        .bind(2, ix.node_key(id).to_string())
        .bind(3, n.concept_name)
        .bind(4, parent)
        .bind(5, static_cast<std::int64_t>(h.depth(id)))
        .bind(6, json(h.path_of(id)).dump())
        .run();
  }
  cache_.erase(ix.axis());
}

std::uint64_t Store::register_axis(const IndexedHierarchy& ix) {
  if (!is_valid_axis_name(ix.axis())) throw ValidationError("invalid axis name '" + ix.axis() + "'");
  CorrectnessReport report = check_correctness(ix);
  if (!report.ok()) throw ValidationError("refusing to catalog an incorrect index: " + report.to_lines().front());
  std::lock_guard lock(mu_);
  Transaction tx(db_);
  std::uint64_t version = 1;
  {
    Stmt st(db_, "SELECT version FROM axes WHERE axis = ?");
    st.bind(1, ix.axis());
    if (st.step()) version = static_cast<std::uint64_t>(st.integer(0)) + 1;
  }
  IndexedHierarchy copy = ix;
  copy.version = version;
  write_axis(copy);
  tx.commit();
  return version;
}

bool Store::has_axis(const std::string& axis) const {
  std::lock_guard lock(mu_);
  Stmt st(db_, "SELECT 1 FROM axes WHERE axis = ?");
  st.bind(1, axis);
  return st.step();
}

std::vector<std::string> Store::axes() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  Stmt st(db_, "SELECT axis FROM axes ORDER BY axis");
  while (st.step()) out.push_back(st.text(0));
  return out;
}

IndexedHierarchy Store::load_axis(const std::string& axis) const {
  std::lock_guard lock(mu_);
  return catalog(axis).index;
}

std::uint64_t Store::axis_version(const std::string& axis) const {
  std::lock_guard lock(mu_);
  return catalog(axis).index.version;
}

std::string Store::catalog_text() const {
  std::lock_guard lock(mu_);
  std::string out;
  Stmt st(db_, "SELECT axis, version, title, rendered_index FROM axes ORDER BY axis");
  while (st.step()) {
    out += "axis " + st.text(0) + " version " + std::to_string(st.integer(1)) + " " + detail::quote(st.text(2)) + "\n";
    out += st.text(3);
  }
  Stmt ds(db_, "SELECT name FROM dconcept_sets ORDER BY name");
  while (ds.step()) out += "dconcepts " + detail::quote(ds.text(0)) + "\n";
  return out;
}

void Store::put_dconcepts(const std::string& name, const std::string& source) {
  if (name.empty()) throw ValidationError("d-concept set needs a name");
  auto known = axes();
  std::set<std::string> known_set(known.begin(), known.end());
  parse_dconcepts(source, &known_set);
  std::lock_guard lock(mu_);
  Stmt(db_, "INSERT OR REPLACE INTO dconcept_sets(name, source) VALUES(?,?)").bind(1, name).bind(2, source).run();
}

std::optional<std::string> Store::dconcepts(const std::string& name) const {
  std::lock_guard lock(mu_);
  Stmt st(db_, "SELECT source FROM dconcept_sets WHERE name = ?");
  st.bind(1, name);
  if (!st.step()) return std::nullopt;
  return st.text(0);
}

std::vector<std::string> Store::dconcept_sets() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  Stmt st(db_, "SELECT name FROM dconcept_sets ORDER BY name");
  while (st.step()) out.push_back(st.text(0));
  return out;
}

void Store::validate_record(InstanceRecord& r) const {
  const Catalog& cat = catalog(r.axis);
  const IndexedHierarchy& ix = cat.index;
  bool denotes_node = std::any_of(ix.node_keys.begin(), ix.node_keys.end(),
                                  [&](const auto& nk) { return instances_overlap(nk.second, r.node_key); });
  if (!denotes_node) throw ValidationError("key " + r.node_key.to_string() + " names no node of axis " + r.axis);
  if (!options_.store_paths) {
    r.path.clear();
    return;
  }
  if (!r.path.empty()) {
    auto node = ix.hierarchy.find_path(r.path);
    if (!node) throw ValidationError("path " + format_node_path(r.path) + " does not exist on axis " + r.axis);
    if (!instances_overlap(ix.node_key(*node), r.node_key)) {
      throw ValidationError("key " + r.node_key.to_string() + " does not belong to " + format_node_path(r.path));
    }
  } else if (auto node = ix.node_for_instance(r.node_key)) {
    r.path = ix.hierarchy.path_of(*node);
  }
}

Episode Store::put_episode(Episode e) {
  if (e.instances.empty()) throw ValidationError("episode without instances");
  std::lock_guard lock(mu_);
  for (auto& r : e.instances) validate_record(r);
  if (e.timestamp.empty()) e.timestamp = utc_now();
  if (!is_valid_timestamp(e.timestamp)) {
    throw ValidationError("timestamp '" + e.timestamp + "' is not YYYY-MM-DDTHH:MM:SSZ");
  }
  Transaction tx(db_);
  if (e.id.empty()) {
    Stmt st(db_, "SELECT count(*) FROM episodes");
    st.step();
    for (std::int64_t n = st.integer(0) + 1;; ++n) {
      e.id = padded("ep-", n);
      Stmt probe(db_, "SELECT 1 FROM episodes WHERE id = ?");
      probe.bind(1, e.id);
      if (!probe.step()) break;
    }
  }
  {
    Stmt st(db_, "SELECT 1 FROM episodes WHERE id = ? AND ts = ?");
    st.bind(1, e.id).bind(2, e.timestamp);
    if (st.step()) throw ValidationError("episode " + e.id + " at " + e.timestamp + " already stored");
  }
  Stmt(db_, "INSERT INTO episodes(id, ts, subject, t_label, c_label, l_label) VALUES(?,?,?,?,?,?)")
      .bind(1, e.id)
      .bind(2, e.timestamp)
      .bind(3, e.subject)
      .bind(4, e.t_label)
      .bind(5, e.c_label)
      .bind(6, e.l_label)
      .run();
  for (std::size_t i = 0; i < e.instances.size(); ++i) {
    const InstanceRecord& r = e.instances[i];
    Stmt(db_,
         "INSERT INTO instances(episode_id, ts, seq, axis, node_key, key_len, polarity, value, path_json, "
         "axis_version) VALUES(?,?,?,?,?,?,?,?,?,?)")
        .bind(1, e.id)
        .bind(2, e.timestamp)
        .bind(3, static_cast<std::int64_t>(i))
        .bind(4, r.axis)
        .bind(5, r.node_key.to_string())
        .bind(6, static_cast<std::int64_t>(r.node_key.size()))
        .bind(7, to_string(r.polarity))
        .bind(8, r.value)
        .bind(9, path_to_json(r.path))
        .bind(10, catalog(r.axis).index.version)
        .run();
  }
  tx.commit();
  return e;
}

std::vector<Episode> Store::select_episodes(const std::string& where, const std::vector<std::string>& args) const {
  std::vector<Episode> out;
  std::string sql = "SELECT id, ts, subject, t_label, c_label, l_label FROM episodes " + where + " ORDER BY id, ts";
  Stmt st(db_, sql.c_str());
  for (std::size_t i = 0; i < args.size(); ++i) st.bind(static_cast<int>(i + 1), args[i]);
  while (st.step()) {
    Episode e;
    e.id = st.text(0);
    e.timestamp = st.text(1);
    e.subject = st.text(2);
    e.t_label = st.opt_text(3);
    e.c_label = st.opt_text(4);
    e.l_label = st.opt_text(5);
    out.push_back(std::move(e));
  }
  for (Episode& e : out) {
    Stmt ins(db_,
             "SELECT axis, node_key, polarity, value, path_json FROM instances WHERE episode_id = ? AND ts = ? "
             "ORDER BY seq");
    ins.bind(1, e.id).bind(2, e.timestamp);
    while (ins.step()) {
      InstanceRecord r;
      r.axis = ins.text(0);
      r.node_key = parse_key(ins.text(1));
      r.polarity = parse_polarity(ins.text(2));
      r.value = ins.opt_text(3);
      r.path = path_from_json(ins.opt_text(4));
      e.instances.push_back(std::move(r));
    }
  }
  return out;
}

std::optional<Episode> Store::get_episode(const EpisodeRef& ref) const {
  std::lock_guard lock(mu_);
  auto found = select_episodes("WHERE id = ? AND ts = ?", {ref.id, ref.timestamp});
  if (found.empty()) return std::nullopt;
  return std::move(found.front());
}

std::vector<Episode> Store::episodes_with_id(const std::string& id) const {
  std::lock_guard lock(mu_);
  return select_episodes("WHERE id = ?", {id});
}

std::vector<EpisodeRef> Store::episode_refs() const {
  std::lock_guard lock(mu_);
  std::vector<EpisodeRef> out;
  Stmt st(db_, "SELECT id, ts FROM episodes ORDER BY id, ts");
  while (st.step()) out.push_back({st.text(0), st.text(1)});
  return out;
}

std::size_t Store::episode_count() const {
  std::lock_guard lock(mu_);
  Stmt st(db_, "SELECT count(*) FROM episodes");
  st.step();
  return static_cast<std::size_t>(st.integer(0));
}

namespace {

std::vector<InstanceHit> select_hits(sqlite3* db, const std::string& axis, std::size_t min_len,
                                     const std::function<bool(const Key&)>& keep) {
  std::vector<InstanceHit> out;
  // Length is the only safe pre-filter: stored keys may hold variables.
  Stmt st(db,
          "SELECT episode_id, ts, node_key, polarity, value, path_json FROM instances "
          "WHERE axis = ? AND orphaned = 0 AND key_len >= ? ORDER BY episode_id, ts, seq");
  st.bind(1, axis).bind(2, static_cast<std::int64_t>(min_len));
  while (st.step()) {
    Key stored = parse_key(st.text(2));
    if (!keep(stored)) continue;
    InstanceHit hit;
    hit.episode = {st.text(0), st.text(1)};
    hit.record.axis = axis;
    hit.record.node_key = std::move(stored);
    hit.record.polarity = parse_polarity(st.text(3));
    hit.record.value = st.opt_text(4);
    hit.record.path = path_from_json(st.opt_text(5));
    out.push_back(std::move(hit));
  }
  return out;
}

}  // namespace

std::vector<InstanceHit> Store::query_by_key(const std::string& axis, const Key& k) const {
  std::lock_guard lock(mu_);
  catalog(axis);
  return select_hits(db_, axis, k.size(), [&](const Key& stored) { return partially_unifiable(k, stored); });
}

std::vector<InstanceHit> Store::query_by_concept(const std::string& axis, const std::string& concept_name) const {
  std::lock_guard lock(mu_);
  const IndexedHierarchy& ix = catalog(axis).index;
  std::vector<Key> keys;
  for (NodeId id : ix.hierarchy.nodes_of(concept_name)) keys.push_back(ix.node_key(id));
  if (keys.empty()) throw NotFoundError("unknown concept \"" + concept_name + "\" on axis " + axis);
  std::size_t shortest = keys.front().size();
  for (const auto& k : keys) shortest = std::min(shortest, k.size());
  return select_hits(db_, axis, shortest, [&](const Key& stored) {
    return std::any_of(keys.begin(), keys.end(), [&](const Key& k) { return partially_unifiable(k, stored); });
  });
}

bool Store::ancestor_check(const std::string& axis, const Key& node_key, const Key& concept_key) const {
  std::lock_guard lock(mu_);
  const Catalog& cat = catalog(axis);
  if (!cat.concept_keys.count(concept_key)) {
    throw NotFoundError(concept_key.to_string() + " is not a concept key of axis " + axis);
  }
  auto it = cat.parent_of.find(node_key);
  if (it == cat.parent_of.end()) throw NotFoundError(node_key.to_string() + " is not a node key of axis " + axis);
  std::optional<Key> at = node_key;
  while (at) {
    if (is_instance(*at, concept_key)) return true;
    at = cat.parent_of.at(*at);
  }
  return false;
}

std::vector<EpisodeRef> Store::query_multiaxial(const MultiaxialExpression& expr, MatchMode mode) const {
  std::lock_guard lock(mu_);
  std::set<std::string> axes;
  for (const auto& d : expr.descriptors) {
    for (const auto& b : d.bindings) {
      catalog(b.axis);
      axes.insert(b.axis);
    }
  }
  std::map<EpisodeRef, std::vector<AxisBinding>> bindings;
  Stmt st(db_,
          "SELECT episode_id, ts, axis, node_key FROM instances "
          "WHERE orphaned = 0 AND polarity = 'affirmed' ORDER BY episode_id, ts, seq");
  while (st.step()) {
    std::string axis = st.text(2);
    if (!axes.count(axis)) continue;
    bindings[{st.text(0), st.text(1)}].push_back({std::move(axis), parse_key(st.text(3))});
  }
  std::vector<EpisodeRef> out;
  for (const auto& [ref, bs] : bindings) {
    if (expression_matches(expr, bs, mode)) out.push_back(ref);
  }
  return out;
}

RemapReport Store::remap_instances(const std::string& axis, const ChangeSet& changes,
                                   const IndexedHierarchy& new_index) {
  std::lock_guard lock(mu_);
  const IndexedHierarchy old = catalog(axis).index;
  if (!changes.axis.empty() && changes.axis != axis) {
    throw ValidationError("change set is for axis " + changes.axis + ", not " + axis);
  }
  if (changes.base_version != old.version) {
    throw ValidationError("change set base version " + std::to_string(changes.base_version) +
                          " does not match catalog version " + std::to_string(old.version) + " of axis " + axis);
  }
  if (new_index.axis() != axis) throw ValidationError("new index is for axis " + new_index.axis());

  RemapReport report;
  Transaction tx(db_);
  IndexedHierarchy next = new_index;
  next.version = old.version + 1;
  report.new_version = next.version;
  write_axis(next);

  struct Row {
    std::int64_t rowid;
    Key key;
    std::vector<std::string> path;
  };
  std::vector<Row> rows;
  {
    Stmt st(db_, "SELECT rowid, node_key, path_json FROM instances WHERE axis = ? AND orphaned = 0");
    st.bind(1, axis);
    while (st.step()) rows.push_back({st.integer(0), parse_key(st.text(1)), path_from_json(st.opt_text(2))});
  }
  for (const Row& row : rows) {
    if (row.path.empty()) {
      ++report.flagged;
      continue;
    }
    auto now = next.hierarchy.find_path(row.path);
    if (!now) {
      Stmt(db_, "UPDATE instances SET orphaned = 1 WHERE rowid = ?").bind(1, row.rowid).run();
      ++report.orphaned;
      continue;
    }
    auto before = old.hierarchy.find_path(row.path);
    if (!before || old.node_key(*before) != row.key) {
      ++report.flagged;
      continue;
    }
    const Key& fresh = next.node_key(*now);
    if (fresh == row.key) {
      ++report.unchanged;
    } else {
      ++report.rewritten;
    }
    Stmt(db_, "UPDATE instances SET node_key = ?, key_len = ?, axis_version = ? WHERE rowid = ?")
        .bind(1, fresh.to_string())
        .bind(2, static_cast<std::int64_t>(fresh.size()))
        .bind(3, next.version)
        .bind(4, row.rowid)
        .run();
  }
  tx.commit();
  return report;
}

std::vector<OrphanRecord> Store::orphaned(const std::string& axis) const {
  std::lock_guard lock(mu_);
  std::vector<OrphanRecord> out;
  Stmt st(db_,
          "SELECT episode_id, ts, node_key, polarity, value, path_json, axis_version FROM instances "
          "WHERE axis = ? AND orphaned = 1 ORDER BY episode_id, ts, seq");
  st.bind(1, axis);
  while (st.step()) {
    OrphanRecord o;
    o.episode = {st.text(0), st.text(1)};
    o.record.axis = axis;
    o.record.node_key = parse_key(st.text(2));
    o.record.polarity = parse_polarity(st.text(3));
    o.record.value = st.opt_text(4);
    o.record.path = path_from_json(st.opt_text(5));
    o.axis_version = static_cast<std::uint64_t>(st.integer(6));
    out.push_back(std::move(o));
  }
  return out;
}

std::string Store::add_case(Case c) {
  if (c.problem.empty()) throw ValidationError("case without problem episodes");
  std::lock_guard lock(mu_);
  Transaction tx(db_);
  for (const auto& ref : c.problem) {
    Stmt st(db_, "SELECT 1 FROM episodes WHERE id = ? AND ts = ?");
    st.bind(1, ref.id).bind(2, ref.timestamp);
    if (!st.step()) throw NotFoundError("case refers to missing episode " + ref.id + " at " + ref.timestamp);
  }
  if (c.id.empty()) {
    Stmt st(db_, "SELECT count(*) FROM cases");
    st.step();
    for (std::int64_t n = st.integer(0) + 1;; ++n) {
      c.id = padded("case-", n);
      Stmt probe(db_, "SELECT 1 FROM cases WHERE id = ?");
      probe.bind(1, c.id);
      if (!probe.step()) break;
    }
  } else {
    Stmt st(db_, "SELECT 1 FROM cases WHERE id = ?");
    st.bind(1, c.id);
    if (st.step()) throw ValidationError("case " + c.id + " already stored");
  }
  Stmt(db_,
       "INSERT INTO cases(id, problem_episode_ids_json, solution_json, assessment_text, outcome_score) "
       "VALUES(?,?,?,?,?)")
      .bind(1, c.id)
      .bind(2, json(c.problem).dump())
      .bind(3, json(c.solution).dump())
      .bind(4, c.assessment)
      .bind(5, c.outcome_score)
      .run();
  tx.commit();
  return c.id;
}

namespace {

Case read_case(const Stmt& st) {
  Case c;
  c.id = st.text(0);
  c.problem = json::parse(st.text(1)).get<std::vector<EpisodeRef>>();
  c.solution = json::parse(st.text(2)).get<std::vector<InstanceRecord>>();
  c.assessment = st.opt_text(3);
  if (!st.is_null(4)) c.outcome_score = st.real(4);
  return c;
}

}  // namespace

std::optional<Case> Store::get_case(const std::string& id) const {
  std::lock_guard lock(mu_);
  Stmt st(db_,
          "SELECT id, problem_episode_ids_json, solution_json, assessment_text, outcome_score FROM cases "
          "WHERE id = ?");
  st.bind(1, id);
  if (!st.step()) return std::nullopt;
  return read_case(st);
}

std::vector<Case> Store::cases() const {
  std::lock_guard lock(mu_);
  std::vector<Case> out;
  Stmt st(db_,
          "SELECT id, problem_episode_ids_json, solution_json, assessment_text, outcome_score FROM cases "
          "ORDER BY id");
  while (st.step()) out.push_back(read_case(st));
  return out;
}

}  // namespace semidx
