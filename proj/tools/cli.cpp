#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "semidx/cbr.hpp"
#include "semidx/dconcepts.hpp"
#include "semidx/error.hpp"
#include "semidx/json_io.hpp"
#include "semidx/service.hpp"
#include "semidx/store.hpp"

namespace semidx::cli {

namespace {

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

struct Options {
  std::string store;

  std::string file;
  bool register_axis = false;

  std::string axis;
  std::string key;
  std::string concept_name;
  std::string expr;
  std::string mode = "descriptor";

  std::string parent;
  std::string node;
  bool remap = false;
  std::vector<std::string> annotations;

  std::string situation;
  std::string dconcepts;
  std::string dc_file;
  std::vector<std::string> assume;

  std::string name;
  std::string id;
  std::size_t k = 5;
  std::string seq_mode = "latest";

  std::string host = "127.0.0.1";
  int port = 8080;
};

class Runner {
 public:
  Runner(Options& o, std::ostream& out) : o_(o), out_(out) {}

  Store& store() {
    if (!store_) {
      std::string location = o_.store;
      if (location.empty()) {
        const char* env = std::getenv("SEMIDX_STORE");
        location = env && *env ? env : "semidx-store";
      }
      store_ = std::make_unique<Store>(location);
    }
    return *store_;
  }

  int index() {
    IndexedHierarchy ix = index_hierarchy(parse_hierarchy(read_input(o_.file)));
    if (o_.register_axis) ix.version = store().register_axis(ix);
    out_ << render_indexed(ix);
    return exit_ok;
  }

  int check() {
    ConceptHierarchy h = parse_hierarchy(read_input(o_.file));
    ValidationReport v = validate(h);
    if (!v.ok()) {
      for (const auto& line : v.to_lines(h)) out_ << line << '\n';
      return exit_domain;
    }
    CorrectnessReport r = check_correctness(index_hierarchy(h));
    for (const auto& line : r.to_lines()) out_ << line << '\n';
    if (!r.ok()) return exit_domain;
    out_ << "ok " << h.size() << " nodes\n";
    return exit_ok;
  }

  int query() {
    const MatchMode mode = match_mode();
    if (!o_.expr.empty()) {
      if (!o_.axis.empty() || !o_.key.empty() || !o_.concept_name.empty()) {
        throw CLI::ValidationError("--expr excludes --axis, --key and --concept");
      }
      for (const auto& ref : store().query_multiaxial(parse_multiaxial(o_.expr), mode)) {
        out_ << ref.id << ' ' << ref.timestamp << '\n';
      }
      return exit_ok;
    }
    if (o_.axis.empty() || o_.key.empty() == o_.concept_name.empty()) {
      throw CLI::ValidationError("query needs --axis with exactly one of --key and --concept, or --expr");
    }
    // A key is checked for syntax even when nothing can match.
    std::optional<Key> key;
    if (!o_.key.empty()) key = parse_key(o_.key);
    if (!store().has_axis(o_.axis)) return exit_ok;
    auto hits = key ? store().query_by_key(o_.axis, *key) : store().query_by_concept(o_.axis, o_.concept_name);
    for (const auto& h : hits) {
      out_ << h.episode.id << ' ' << h.episode.timestamp << ' ' << h.record.axis << ' ' << h.record.node_key.to_string()
           << '\n';
    }
    return exit_ok;
  }

  int insert_node() {
    IndexedHierarchy ix = axis_index();
    NodeId parent = resolve(ix, o_.parent);
    Annotations a = parse_annotations(join(o_.annotations));
    return maintain(ix, semidx::insert_node(ix, parent, o_.name, a));
  }

  int delete_node() {
    IndexedHierarchy ix = axis_index();
    return maintain(ix, semidx::delete_node(ix, resolve(ix, o_.node)));
  }

  int infer() {
    DConceptHierarchy h = [&] {
      if (!o_.dc_file.empty()) return parse_dconcepts(read_input(o_.dc_file));
      std::string name = o_.dconcepts;
      if (name.empty()) {
        auto sets = store().dconcept_sets();
        if (sets.size() != 1) throw ValidationError("name a d-concept set with --dconcepts or --dc-file");
        name = sets.front();
      }
      auto source = store().dconcepts(name);
      if (!source) throw NotFoundError("unknown d-concept set " + name);
      return parse_dconcepts(*source);
    }();

    std::map<std::string, bool> given;
    for (const auto& a : o_.assume) {
      const auto eq = a.rfind('=');
      if (eq == std::string::npos) throw CLI::ValidationError("--assume expects <descriptor>=yes|no");
      const std::string answer = a.substr(eq + 1);
      if (answer != "yes" && answer != "no") throw CLI::ValidationError("--assume expects <descriptor>=yes|no");
      given[parse_descriptor(a.substr(0, eq)).to_string()] = answer == "yes";
    }
    std::vector<std::pair<std::string, std::string>> unresolved;
    InferenceOptions opts;
    opts.mode = match_mode();
    opts.ask = [&](const std::string& owner, const MultiaxialDescriptor& d) -> std::optional<bool> {
      if (auto it = given.find(d.to_string()); it != given.end()) return it->second;
      std::pair<std::string, std::string> item{owner, d.to_string()};
      if (std::find(unresolved.begin(), unresolved.end(), item) == unresolved.end()) unresolved.push_back(item);
      return std::nullopt;
    };
    for (const auto& name : infer_most_specific(h, parse_situation(o_.situation), opts)) {
      out_ << h.get(name).concept_key.to_string() << " \"" << name << "\"\n";
    }
    for (const auto& [owner, cond] : unresolved) out_ << "unresolved \"" << owner << "\" " << cond << '\n';
    return exit_ok;
  }

  int dconcepts_add() {
    store().put_dconcepts(o_.name, read_input(o_.file));
    out_ << o_.name << '\n';
    return exit_ok;
  }

  int episode_add() {
    Episode e = json::parse(read_input(o_.file)).get<Episode>();
    Episode stored = store().put_episode(std::move(e));
    out_ << stored.id << ' ' << stored.timestamp << '\n';
    return exit_ok;
  }

  int episode_get() {
    auto found = store().episodes_with_id(o_.id);
    if (found.empty()) throw NotFoundError("unknown episode " + o_.id);
    for (const auto& e : found) out_ << json(e).dump() << '\n';
    return exit_ok;
  }

  int case_add() {
    std::string id = store().add_case(json::parse(read_input(o_.file)).get<Case>());
    out_ << id << '\n';
    return exit_ok;
  }

  int cbr_retrieve() {
    if (o_.seq_mode != "latest" && o_.seq_mode != "mean") throw CLI::ValidationError("--mode must be latest or mean");
    auto ranked = retrieve(store(), parse_situation(o_.situation), o_.k, default_measure(),
                           o_.seq_mode == "latest" ? SequenceMode::latest : SequenceMode::mean_aligned);
    for (const auto& r : ranked) out_ << r.c.id << ' ' << std::fixed << std::setprecision(6) << r.score << '\n';
    return exit_ok;
  }

  int serve() {
    Service service(store());
    std::cerr << "listening on " << o_.host << ':' << o_.port << '\n';
    service.listen(o_.host, o_.port);
    return exit_ok;
  }

 private:
  MatchMode match_mode() const {
    if (o_.mode == "descriptor") return MatchMode::descriptor_as_query;
    if (o_.mode == "situation") return MatchMode::situation_as_query;
    throw CLI::ValidationError("--match must be descriptor or situation");
  }

  // The axis comes from --file when given, else from the store catalog.
  IndexedHierarchy axis_index() {
    if (!o_.file.empty()) {
      if (o_.remap) throw CLI::ValidationError("--remap works on a stored axis, not --file");
      return index_hierarchy(parse_hierarchy(read_input(o_.file)));
    }
    if (o_.axis.empty()) throw CLI::ValidationError("name the axis with --axis or --file");
    return store().load_axis(o_.axis);
  }

  static NodeId resolve(const IndexedHierarchy& ix, const std::string& path) {
    auto id = ix.hierarchy.find_path(parse_node_path(path));
    if (!id) throw NotFoundError("no node at path " + path);
    return *id;
  }

  static std::string join(const std::vector<std::string>& parts) {
    std::string s;
    for (const auto& p : parts) s += (s.empty() ? "" : " ") + p;
    return s;
  }

  int maintain(const IndexedHierarchy& before, const MaintenanceResult& result) {
    ChangeSet changes = result.changes;
    changes.base_version = before.version;
    out_ << changes.to_text();
    if (o_.remap) {
      RemapReport r = store().remap_instances(before.axis(), changes, result.index);
      out_ << "remap rewritten=" << r.rewritten << " unchanged=" << r.unchanged << " orphaned=" << r.orphaned
           << " flagged=" << r.flagged << " version=" << r.new_version << '\n';
    }
    return exit_ok;
  }

  Options& o_;
  std::ostream& out_;
  std::unique_ptr<Store> store_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Semantic indexing of concept hierarchies", "semidx"};
  app.require_subcommand(1);
  app.add_option("--store", o.store, "Store directory or database file (default: $SEMIDX_STORE, ./semidx-store)");

  auto* index = app.add_subcommand("index", "Index a hierarchy file and print the concept keys");
  index->add_option("file", o.file, "Hierarchy file, - for stdin")->required();
  index->add_flag("--register", o.register_axis, "Also store the axis in the catalog");

  auto* check = app.add_subcommand("check", "Validate and index a hierarchy file and report violations");
  check->add_option("file", o.file, "Hierarchy file, - for stdin")->required();

  auto* query = app.add_subcommand("query", "List stored records or episodes matching a key, concept or expression");
  query->add_option("--axis", o.axis);
  query->add_option("--key", o.key, "Records whose key this key unifies into");
  query->add_option("--concept", o.concept_name, "Records at or below a node of this concept");
  query->add_option("--expr", o.expr, "Multiaxial expression; prints matching episodes");
  query->add_option("--match", o.mode, "descriptor (default) or situation");

  auto* insert = app.add_subcommand("insert-node", "Insert a leaf and print the change set");
  insert->add_option("--axis", o.axis, "Stored axis");
  insert->add_option("--file", o.file, "Hierarchy file instead of a stored axis");
  insert->add_option("--parent", o.parent, "Parent node path, e.g. \"a > b\"")->required();
  insert->add_option("--concept", o.name, "Concept of the new node")->required();
  insert->add_option("--annotate", o.annotations, "Dialog annotation such as ?optional");
  insert->add_flag("--remap", o.remap, "Store the new index and rewrite the axis' records");

  auto* del = app.add_subcommand("delete-node", "Delete a node with its subtree and print the change set");
  del->add_option("--axis", o.axis, "Stored axis");
  del->add_option("--file", o.file, "Hierarchy file instead of a stored axis");
  del->add_option("--node", o.node, "Node path, e.g. \"a > b\"")->required();
  del->add_flag("--remap", o.remap, "Store the new index and rewrite the axis' records");

  auto* infer = app.add_subcommand("infer", "Print the most specific valid d-concepts for a situation");
  infer->add_option("--situation", o.situation, "Bindings such as [(L[0,1]),(Q[0,0])]")->required();
  infer->add_option("--dconcepts", o.dconcepts, "Stored d-concept set");
  infer->add_option("--dc-file", o.dc_file, "D-concept file instead of a stored set");
  infer->add_option("--assume", o.assume, "Answer for a condition on an unbound axis: <descriptor>=yes|no");
  infer->add_option("--match", o.mode, "descriptor (default) or situation");

  auto* dc = app.add_subcommand("dconcepts", "Manage stored d-concept sets");
  dc->require_subcommand(1);
  auto* dc_add = dc->add_subcommand("add", "Store a d-concept set");
  dc_add->add_option("--name", o.name)->required();
  dc_add->add_option("file", o.file, "D-concept file, - for stdin")->required();

  auto* episode = app.add_subcommand("episode", "Store or fetch episodes");
  episode->require_subcommand(1);
  auto* ep_add = episode->add_subcommand("add", "Store an episode given as JSON; prints id and timestamp");
  ep_add->add_option("file", o.file, "JSON file, - for stdin")->required();
  auto* ep_get = episode->add_subcommand("get", "Print every episode with this id as JSON lines");
  ep_get->add_option("id", o.id)->required();

  auto* cases = app.add_subcommand("case", "Store cases");
  cases->require_subcommand(1);
  auto* case_add = cases->add_subcommand("add", "Store a case given as JSON; prints its id");
  case_add->add_option("file", o.file, "JSON file, - for stdin")->required();

  auto* cbr = app.add_subcommand("cbr", "Case-based retrieval");
  cbr->require_subcommand(1);
  auto* cbr_retrieve = cbr->add_subcommand("retrieve", "Print the k most similar cases with scores");
  cbr_retrieve->add_option("--situation", o.situation)->required();
  cbr_retrieve->add_option("--k", o.k, "Number of cases (default 5)")->check(CLI::Validator(
      [](const std::string& v) { return v == "0" ? std::string("must be at least 1") : std::string(); }, "K>0"));
  cbr_retrieve->add_option("--mode", o.seq_mode, "latest (default) or mean");

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", o.host);
  serve->add_option("--port", o.port)->check(CLI::Range(0, 65535));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  Runner r(o, out);
  try {
    if (*index) return r.index();
    if (*check) return r.check();
    if (*query) return r.query();
    if (*insert) return r.insert_node();
    if (*del) return r.delete_node();
    if (*infer) return r.infer();
    if (*dc_add) return r.dconcepts_add();
    if (*ep_add) return r.episode_add();
    if (*ep_get) return r.episode_get();
    if (*case_add) return r.case_add();
    if (*cbr_retrieve) return r.cbr_retrieve();
    if (*serve) return r.serve();
  } catch (const CLI::ValidationError& e) {
    err << "usage: " << one_line(e.what()) << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return exit_domain;
  }
  return exit_usage;
}

}  // namespace semidx::cli
