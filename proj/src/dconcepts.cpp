#include "semidx/dconcepts.hpp"

#include <algorithm>

#include "semidx/error.hpp"
#include "text.hpp"

namespace semidx {

using detail::quote;
using detail::read_quoted;
using detail::skip_spaces;
using detail::trim;

const DConcept& DConceptHierarchy::get(std::string_view name) const {
  auto it = concepts_.find(std::string(name));
  if (it == concepts_.end()) throw NotFoundError("unknown d-concept " + quote(name));
  return it->second;
}

std::vector<std::string> DConceptHierarchy::children(std::string_view name) const {
  get(name);
  std::vector<std::string> out;
  for (const auto& n : order_) {
    const auto& p = concepts_.at(n).parent;
    if (p && *p == name) out.push_back(n);
  }
  return out;
}

std::vector<std::string> DConceptHierarchy::ancestors_or_self(std::string_view name) const {
  std::vector<std::string> out;
  const DConcept* c = &get(name);
  while (true) {
    out.push_back(c->name);
    if (!c->parent) break;
    c = &get(*c->parent);
  }
  return out;
}

std::string DConceptHierarchy::to_text() const {
  std::string out;
  for (const auto& n : order_) {
    const DConcept& c = concepts_.at(n);
    out += "dconcept " + quote(c.name);
    if (c.parent) out += " parent " + quote(*c.parent);
    out += ":\n";
    for (const auto& d : c.required) out += "  requires " + d.to_string() + "\n";
    for (const auto& r : c.required_concepts) out += "  requires " + quote(r) + "\n";
    for (const auto& d : c.excluded) out += "  excludes " + d.to_string() + "\n";
    for (const auto& r : c.excluded_concepts) out += "  excludes " + quote(r) + "\n";
  }
  return out;
}

namespace {

ParseError line_error(const std::string& what, std::size_t line) { return ParseError(what, line, "line"); }

// Definition graph: every concept points at its parent and at the concepts
// its conditions mention.
std::optional<std::vector<std::string>> find_cycle(const std::map<std::string, DConcept>& concepts,
                                                   const std::vector<std::string>& order) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& [n, c] : concepts) {
    auto& v = out[n];
    if (c.parent) v.push_back(*c.parent);
    v.insert(v.end(), c.required_concepts.begin(), c.required_concepts.end());
    v.insert(v.end(), c.excluded_concepts.begin(), c.excluded_concepts.end());
  }
  enum { white, grey, black };
  std::map<std::string, int> color;
  std::vector<std::string> stack;
  std::optional<std::vector<std::string>> found;
  std::function<void(const std::string&)> visit = [&](const std::string& n) {
    color[n] = grey;
    stack.push_back(n);
    for (const auto& m : out[n]) {
      if (found) return;
      if (color[m] == grey) {
        auto it = std::find(stack.begin(), stack.end(), m);
        found = std::vector<std::string>(it, stack.end());
        found->push_back(m);
        return;
      }
      if (color[m] == white) visit(m);
    }
    stack.pop_back();
    color[n] = black;
  };
  for (const auto& n : order) {
    if (color[n] == white) visit(n);
    if (found) break;
  }
  return found;
}

}  // namespace

DConceptHierarchy parse_dconcepts(std::string_view text, const std::set<std::string>* known_axes) {
  DConceptHierarchy h;
  DConcept* current = nullptr;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;

    const bool indented = std::isspace(static_cast<unsigned char>(line.front()));
    if (!indented) {
      if (!body.starts_with("dconcept ")) throw line_error("expected 'dconcept'", line_no);
      std::size_t pos = 8;
      skip_spaces(body, pos);
      DConcept c;
      try {
        c.name = read_quoted(body, pos);
        skip_spaces(body, pos);
        if (body.substr(pos).starts_with("parent")) {
          pos += 6;
          skip_spaces(body, pos);
          c.parent = read_quoted(body, pos);
          skip_spaces(body, pos);
        }
      } catch (const ParseError& e) {
        throw line_error(std::string(e.what()), line_no);
      }
      if (pos >= body.size() || body[pos] != ':' || pos + 1 != body.size()) {
        throw line_error("expected ':' after d-concept header", line_no);
      }
      if (c.name.empty()) throw line_error("empty d-concept name", line_no);
      if (h.concepts_.count(c.name)) throw ValidationError("duplicate d-concept " + quote(c.name));
      h.order_.push_back(c.name);
      current = &h.concepts_.emplace(c.name, std::move(c)).first->second;
      continue;
    }

    if (!current) throw line_error("condition outside a d-concept block", line_no);
    bool req = body.starts_with("requires ");
    if (!req && !body.starts_with("excludes ")) throw line_error("expected 'requires' or 'excludes'", line_no);
    std::string_view rest = trim(body.substr(9));
    try {
      if (!rest.empty() && rest.front() == '"') {
        std::size_t pos = 0;
        std::string ref = read_quoted(rest, pos);
        if (pos != rest.size()) throw ParseError("trailing characters", pos);
        (req ? current->required_concepts : current->excluded_concepts).push_back(std::move(ref));
      } else {
        MultiaxialExpression e = parse_multiaxial(rest, known_axes);
        auto& dst = req ? current->required : current->excluded;
        dst.insert(dst.end(), e.descriptors.begin(), e.descriptors.end());
      }
    } catch (const ParseError& e) {
      throw line_error(std::string(e.what()), line_no);
    }
  }

  if (h.order_.empty()) throw ValidationError("no d-concepts defined");
  for (const auto& n : h.order_) {
    const DConcept& c = h.concepts_.at(n);
    if (!c.parent) {
      if (!h.root_.empty()) throw ValidationError("second root d-concept " + quote(n));
      h.root_ = n;
    } else if (!h.concepts_.count(*c.parent)) {
      throw ValidationError("d-concept " + quote(n) + " names unknown parent " + quote(*c.parent));
    }
    for (const auto* refs : {&c.required_concepts, &c.excluded_concepts}) {
      for (const auto& r : *refs) {
        if (!h.concepts_.count(r)) throw ValidationError("d-concept " + quote(n) + " refers to unknown " + quote(r));
      }
    }
  }
  if (auto cycle = find_cycle(h.concepts_, h.order_)) {
    std::string path;
    for (std::size_t i = 0; i < cycle->size(); ++i) path += (i ? " -> " : "") + quote((*cycle)[i]);
    throw ValidationError("cyclic definition " + path);
  }
  if (h.root_.empty()) throw ValidationError("no root d-concept");

  ConceptHierarchy tree(h.name_, "d-concepts", h.root_);
  std::vector<std::pair<std::string, NodeId>> todo{{h.root_, tree.root()}};
  for (std::size_t i = 0; i < todo.size(); ++i) {
    auto [n, id] = todo[i];
    for (const auto& child : h.children(n)) todo.emplace_back(child, tree.add_child(id, child));
  }
  h.index_ = index_hierarchy(tree);
  for (auto& [n, c] : h.concepts_) c.concept_key = h.index_.concept_key(n);
  return h;
}

namespace {

bool axes_known(const MultiaxialDescriptor& d, const Situation& s) {
  return std::all_of(d.bindings.begin(), d.bindings.end(), [&](const AxisBinding& b) { return s.has_axis(b.axis); });
}

bool condition_holds(const std::string& owner, const MultiaxialDescriptor& d, const Situation& s,
                     const InferenceOptions& opts) {
  if (descriptor_matches(d, s, opts.mode)) return true;
  if (opts.ask && !axes_known(d, s)) {
    if (auto answer = opts.ask(owner, d)) return *answer;
  }
  return false;
}

bool valid_rec(const DConceptHierarchy& h, const std::string& name, const Situation& s, const InferenceOptions& opts) {
  for (const auto& a : h.ancestors_or_self(name)) {
    const DConcept& c = h.get(a);
    for (const auto& d : c.required) {
      if (!condition_holds(a, d, s, opts)) return false;
    }
    for (const auto& d : c.excluded) {
      if (condition_holds(a, d, s, opts)) return false;
    }
    for (const auto& r : c.required_concepts) {
      if (!valid_rec(h, r, s, opts)) return false;
    }
    for (const auto& r : c.excluded_concepts) {
      if (valid_rec(h, r, s, opts)) return false;
    }
  }
  return true;
}

}  // namespace

bool is_valid(const DConceptHierarchy& h, std::string_view name, const Situation& s, const InferenceOptions& opts) {
  return valid_rec(h, std::string(name), s, opts);
}

bool more_general_than(const DConceptHierarchy& h, std::string_view ci, std::string_view cj,
                       std::span<const Situation> base, const InferenceOptions& opts) {
  h.get(ci);
  h.get(cj);
  return std::all_of(base.begin(), base.end(),
                     [&](const Situation& s) { return !is_valid(h, cj, s, opts) || is_valid(h, ci, s, opts); });
}

std::vector<std::string> infer_most_specific(const DConceptHierarchy& h, const Situation& s,
                                             const InferenceOptions& opts) {
  std::set<std::string> result;
  if (!is_valid(h, h.root(), s, opts)) return {};
  std::vector<std::string> frontier{h.root()};
  while (!frontier.empty()) {
    std::vector<std::string> next;
    for (const auto& n : frontier) {
      bool any_child = false;
      for (const auto& child : h.children(n)) {
        if (is_valid(h, child, s, opts)) {
          any_child = true;
          next.push_back(child);
        }
      }
      if (!any_child) result.insert(n);
    }
    frontier = std::move(next);
  }
  std::vector<std::string> out;
  for (const auto& n : h.names()) {
    if (result.count(n)) out.push_back(n);
  }
  return out;
}

bool check_maximally_general(const DConceptHierarchy& h, std::string_view c, std::span<const Situation> positives,
                             std::span<const Situation> negatives, std::span<const std::string> peers,
                             const InferenceOptions& opts) {
  auto clean = [&](std::string_view n) {
    return std::none_of(negatives.begin(), negatives.end(), [&](const Situation& s) { return is_valid(h, n, s, opts); });
  };
  if (!clean(c)) return false;
  std::vector<Situation> base(positives.begin(), positives.end());
  base.insert(base.end(), negatives.begin(), negatives.end());
  for (const auto& p : peers) {
    if (clean(p) && !more_general_than(h, c, p, base, opts)) return false;
  }
  return true;
}

}  // namespace semidx
