#include "semidx/service.hpp"

#include <httplib.h>

#include "semidx/cbr.hpp"
#include "semidx/dconcepts.hpp"
#include "semidx/error.hpp"
#include "semidx/json_io.hpp"

namespace semidx {

namespace {

json question_json(const Question& q) {
  json options = json::array();
  for (const auto& o : q.options) {
    options.push_back({{"node", to_underlying(o.node)},
                       {"concept", o.concept_name},
                       {"key", o.key},
                       {"has_children", o.has_children}});
  }
  json extras = json::object();
  for (const auto& [k, v] : q.extras) extras[k] = v;
  json j{{"node", to_underlying(q.node)},
         {"concept", q.concept_name},
         {"path", q.path},
         {"key", q.key},
         {"type", q.type == QuestionType::single ? "single" : "multi"},
         {"optional", q.optional},
         {"negatable", q.negatable},
         {"default", nullptr},
         {"extras", extras},
         {"options", options}};
  if (q.default_child) j["default"] = *q.default_child;
  return j;
}

json session_json(const DialogSession& s) {
  const ConceptHierarchy& h = s.index().hierarchy;
  json trail = json::array();
  for (const auto& a : s.answers()) {
    json x{{"node", to_underlying(a.node)},
           {"concept", h.node(a.node).concept_name},
           {"affirm", a.selection.affirm},
           {"negate", a.selection.negate},
           {"skip", a.selection.skip}};
    if (a.selection.value) x["value"] = *a.selection.value;
    trail.push_back(std::move(x));
  }
  json j{{"session", s.id()},
         {"axis", s.index().axis()},
         {"subject", s.subject()},
         {"status", to_string(s.status())},
         {"question", nullptr},
         {"trail", trail}};
  if (auto q = s.question()) j["question"] = question_json(*q);
  if (s.status() != SessionStatus::active) j["episode"] = s.episode().instances;
  return j;
}

Selection selection_from(const json& j) {
  Selection s;
  s.affirm = j.value("affirm", std::vector<std::string>{});
  s.negate = j.value("negate", std::vector<std::string>{});
  s.skip = j.value("skip", false);
  if (auto it = j.find("value"); it != j.end() && !it->is_null()) s.value = it->get<std::string>();
  return s;
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed JSON body: ") + e.what());
  }
}

void reply(httplib::Response& res, const json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

// Answers conditions on axes the situation lacks from the request's
// `assume` map (condition text -> bool) and remembers what it could not.
struct Assumptions {
  std::map<std::string, bool> given;
  json unresolved = json::array();

  explicit Assumptions(const json& body) {
    if (auto it = body.find("assume"); it != body.end()) given = it->get<std::map<std::string, bool>>();
  }

  InferenceOptions options() {
    InferenceOptions opts;
    opts.ask = [this](const std::string& owner, const MultiaxialDescriptor& d) -> std::optional<bool> {
      const std::string text = d.to_string();
      if (auto it = given.find(text); it != given.end()) return it->second;
      json item{{"dconcept", owner}, {"condition", text}};
      if (std::find(unresolved.begin(), unresolved.end(), item) == unresolved.end()) unresolved.push_back(item);
      return std::nullopt;
    };
    return opts;
  }
};

json most_specific_json(const DConceptHierarchy& h, const std::vector<std::string>& names) {
  json out = json::array();
  for (const auto& n : names) out.push_back({{"name", n}, {"key", h.get(n).concept_key}});
  return out;
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ConsistencyError& e) {
      reply(res, {{"error", e.what()}, {"kind", "consistency"}}, 409);
    } catch (const NotFoundError& e) {
      reply(res, {{"error", e.what()}, {"kind", "not_found"}}, 404);
    } catch (const Error& e) {
      reply(res, {{"error", e.what()}, {"kind", "invalid"}}, 400);
    } catch (const json::exception& e) {
      reply(res, {{"error", std::string("bad request: ") + e.what()}, {"kind", "invalid"}}, 400);
    } catch (const std::exception& e) {
      reply(res, {{"error", e.what()}, {"kind", "internal"}}, 500);
    }
  };
}

bool flag(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return false;
  const std::string v = req.get_param_value(name);
  return v == "1" || v == "true" || v == "yes";
}

}  // namespace

Service::Service(Store& store, ServiceOptions options)
    : store_(store), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  mount(*server_);
}

Service::~Service() = default;

std::shared_ptr<Service::Entry> Service::session(const std::string& id) {
  std::lock_guard lock(sessions_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session " + id);
  return it->second;
}

std::string Service::resolve_dconcepts(const std::string& requested) const {
  if (!requested.empty()) return requested;
  if (!options_.dconcepts.empty()) return options_.dconcepts;
  auto sets = store_.dconcept_sets();
  if (sets.size() == 1) return sets.front();
  throw ValidationError(sets.empty() ? "no d-concept set stored" : "several d-concept sets stored; name one");
}

void Service::mount(httplib::Server& server) {
  server.Post("/axes", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::string source = req.body;
    if (req.get_header_value("Content-Type").find("json") != std::string::npos) {
      source = parse_body(req).at("source").get<std::string>();
    }
    IndexedHierarchy ix = index_hierarchy(parse_hierarchy(source));
    std::uint64_t version = store_.register_axis(ix);
    reply(res, {{"axis", ix.axis()}, {"version", version}, {"index", render_indexed(ix)}}, 201);
  }));

  server.Get("/axes", guarded([this](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const auto& a : store_.axes()) {
      IndexedHierarchy ix = store_.load_axis(a);
      out.push_back({{"axis", a}, {"version", ix.version}, {"title", ix.hierarchy.title()}});
    }
    reply(res, {{"axes", out}});
  }));

  server.Get(R"(/axes/([^/]+)/index)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    IndexedHierarchy ix = store_.load_axis(req.matches[1]);
    if (req.get_param_value("format") == "text") {
      res.set_content(render_indexed(ix), "text/plain");
      return;
    }
    reply(res, {{"axis", ix.axis()}, {"version", ix.version}, {"index", render_indexed(ix)}});
  }));

  server.Post("/dconcepts", guarded([this](const httplib::Request& req, httplib::Response& res) {
    json body = parse_body(req);
    const std::string name = body.at("name").get<std::string>();
    store_.put_dconcepts(name, body.at("source").get<std::string>());
    reply(res, {{"name", name}}, 201);
  }));

  server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    json body = parse_body(req);
    auto ix = std::make_shared<const IndexedHierarchy>(store_.load_axis(body.at("axis").get<std::string>()));
    auto entry = std::make_shared<Entry>();
    std::string id;
    {
      std::lock_guard lock(sessions_mu_);
      id = "s-" + std::to_string(next_session_++);
      entry->session =
          std::make_unique<DialogSession>(id, ix, body.value("subject", std::string()), options_.strategy);
      sessions_.emplace(id, entry);
    }
    std::lock_guard lock(entry->mu);
    reply(res, session_json(*entry->session), 201);
  }));

  auto view = guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto entry = session(req.matches[1]);
    std::lock_guard lock(entry->mu);
    reply(res, session_json(*entry->session));
  });
  server.Get(R"(/sessions/([^/]+))", view);
  server.Get(R"(/sessions/([^/]+)/question)", view);

  server.Post(R"(/sessions/([^/]+)/answer)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto entry = session(req.matches[1]);
    json body = parse_body(req);
    std::lock_guard lock(entry->mu);
    entry->session->answer(NodeId{body.at("node").get<std::uint32_t>()}, selection_from(body));
    reply(res, session_json(*entry->session));
  }));

  server.Post(R"(/sessions/([^/]+)/back)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto entry = session(req.matches[1]);
    std::lock_guard lock(entry->mu);
    entry->session->back();
    reply(res, session_json(*entry->session));
  }));

  server.Post(R"(/sessions/([^/]+)/commit)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto entry = session(req.matches[1]);
    json body = parse_body(req);
    std::lock_guard lock(entry->mu);
    DialogSession& s = *entry->session;
    if (s.status() != SessionStatus::complete) {
      throw ValidationError("session " + s.id() + " is " + to_string(s.status()) + ", not complete");
    }
    std::optional<DConceptHierarchy> dh;
    if (flag(req, "infer")) {
      const std::string name = resolve_dconcepts(req.get_param_value("dconcepts"));
      auto source = store_.dconcepts(name);
      if (!source) throw NotFoundError("unknown d-concept set " + name);
      dh = parse_dconcepts(*source);
    }
    Episode e = s.episode();
    if (body.contains("id")) e.id = body.at("id").get<std::string>();
    if (body.contains("ts")) e.timestamp = body.at("ts").get<std::string>();
    Episode stored = store_.put_episode(e);
    s.mark_committed();
    json out{{"session", s.id()}, {"episode", stored}};
    if (dh) {
      Assumptions assume(body);
      out["most_specific"] = most_specific_json(*dh, infer_most_specific(*dh, stored.situation(), assume.options()));
      out["unresolved"] = assume.unresolved;
    }
    reply(res, out);
  }));

  server.Post("/episodes", guarded([this](const httplib::Request& req, httplib::Response& res) {
    reply(res, store_.put_episode(parse_body(req).get<Episode>()), 201);
  }));

  server.Get(R"(/episodes/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto found = store_.episodes_with_id(req.matches[1]);
    if (found.empty()) throw NotFoundError("unknown episode " + std::string(req.matches[1]));
    reply(res, {{"episodes", found}});
  }));

  server.Get("/query", guarded([this](const httplib::Request& req, httplib::Response& res) {
    if (req.has_param("expr")) {
      json refs = store_.query_multiaxial(parse_multiaxial(req.get_param_value("expr")));
      reply(res, {{"episodes", refs}});
      return;
    }
    if (!req.has_param("axis")) throw ValidationError("query needs axis and key, axis and concept, or expr");
    const std::string axis = req.get_param_value("axis");
    std::vector<InstanceHit> hits;
    if (req.has_param("key")) {
      hits = store_.query_by_key(axis, parse_key(req.get_param_value("key")));
    } else if (req.has_param("concept")) {
      hits = store_.query_by_concept(axis, req.get_param_value("concept"));
    } else {
      throw ValidationError("query needs key or concept");
    }
    json out = json::array();
    for (const auto& h : hits) out.push_back({{"episode", h.episode}, {"record", h.record}});
    reply(res, {{"hits", out}});
  }));

  server.Post("/infer", guarded([this](const httplib::Request& req, httplib::Response& res) {
    json body = parse_body(req);
    DConceptHierarchy h = [&] {
      if (body.contains("source")) return parse_dconcepts(body.at("source").get<std::string>());
      const std::string name = resolve_dconcepts(body.value("dconcepts", std::string()));
      auto source = store_.dconcepts(name);
      if (!source) throw NotFoundError("unknown d-concept set " + name);
      return parse_dconcepts(*source);
    }();
    Situation s = body.at("situation").get<Situation>();
    Assumptions assume(body);
    json out{{"most_specific", most_specific_json(h, infer_most_specific(h, s, assume.options()))}};
    out["unresolved"] = assume.unresolved;
    reply(res, out);
  }));

  server.Post("/cbr/retrieve", guarded([this](const httplib::Request& req, httplib::Response& res) {
    json body = parse_body(req);
    Situation s = body.at("situation").get<Situation>();
    const auto k = body.value("k", std::size_t{5});
    const std::string mode = body.value("mode", std::string("latest"));
    if (mode != "latest" && mode != "mean") throw ValidationError("mode must be latest or mean");
    auto ranked = retrieve(store_, s, k, default_measure(),
                           mode == "latest" ? SequenceMode::latest : SequenceMode::mean_aligned);
    json out = json::array();
    for (const auto& r : ranked) out.push_back({{"case", r.c}, {"score", r.score}});
    reply(res, {{"results", out}});
  }));
}

void Service::listen(const std::string& host, int port) {
  if (!server_->listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

int Service::bind_any(const std::string& host) {
  int port = server_->bind_to_any_port(host);
  if (port < 0) throw Error("cannot bind to " + host);
  return port;
}

void Service::run() { server_->listen_after_bind(); }

void Service::wait_until_ready() const { server_->wait_until_ready(); }

void Service::stop() { server_->stop(); }

}  // namespace semidx
