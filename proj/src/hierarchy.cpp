#include "semidx/hierarchy.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "semidx/error.hpp"

namespace semidx {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool needs_quotes(std::string_view v) {
  return v.find_first_of(" \"?") != std::string_view::npos || v.empty();
}

std::string quoted(std::string_view v) {
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

// Tokenizes the annotation tail of a concept line: `?a ?b=v ?c="x y"`.
Annotations parse_annotations(std::string_view tail, std::size_t line_no) {
  Annotations ann;
  std::size_t pos = 0;
  while (true) {
    while (pos < tail.size() && tail[pos] == ' ') ++pos;
    if (pos >= tail.size()) break;
    if (tail[pos] != '?') throw ParseError("annotation must start with '?'", line_no, "line");
    ++pos;
    std::string name;
    while (pos < tail.size() && tail[pos] != ' ' && tail[pos] != '=') name += tail[pos++];
    std::optional<std::string> value;
    if (pos < tail.size() && tail[pos] == '=') {
      ++pos;
      std::string v;
      if (pos < tail.size() && tail[pos] == '"') {
        ++pos;
        bool closed = false;
        while (pos < tail.size()) {
          char c = tail[pos++];
          if (c == '\\' && pos < tail.size()) {
            v += tail[pos++];
          } else if (c == '"') {
            closed = true;
            break;
          } else {
            v += c;
          }
        }
        if (!closed) throw ParseError("unterminated quoted annotation value", line_no, "line");
      } else {
        while (pos < tail.size() && tail[pos] != ' ') v += tail[pos++];
      }
      value = std::move(v);
    }
    if (name == "single" && !value) {
      ann.question = QuestionType::single;
    } else if (name == "multi" && !value) {
      ann.question = QuestionType::multi;
    } else if (name == "optional" && !value) {
      ann.optional = true;
    } else if (name == "negatable" && !value) {
      ann.negatable = true;
    } else if (name == "default" && value) {
      ann.default_child = *value;
    } else if (!name.empty() && value) {
      ann.extras.emplace_back(name, *value);
    } else {
      throw ParseError("unknown annotation '?" + name + "'", line_no, "line");
    }
  }
  return ann;
}

}  // namespace

Annotations parse_annotations(std::string_view text) {
  text = trim(text);
  return text.empty() ? Annotations{} : parse_annotations(text, 1);
}

std::string Annotations::to_string() const {
  std::string out;
  auto add = [&](const std::string& tok) {
    if (!out.empty()) out += ' ';
    out += tok;
  };
  if (question) add(*question == QuestionType::single ? "?single" : "?multi");
  if (optional) add("?optional");
  if (negatable) add("?negatable");
  if (default_child) add("?default=" + (needs_quotes(*default_child) ? quoted(*default_child) : *default_child));
  for (const auto& [k, v] : extras) add("?" + k + "=" + (needs_quotes(v) ? quoted(v) : v));
  return out;
}

ConceptHierarchy::ConceptHierarchy(std::string axis_name, std::string title, std::string root_concept,
                                   Annotations root_annotations)
    : axis_name_(std::move(axis_name)), title_(std::move(title)) {
  HierarchyNode root;
  root.id = NodeId{0};
  root.concept_name = std::move(root_concept);
  root.annotations = std::move(root_annotations);
  nodes_.emplace(root.id, std::move(root));
  root_ = NodeId{0};
  next_id_ = NodeId{1};
}

const HierarchyNode& ConceptHierarchy::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw NotFoundError("unknown node " + std::to_string(to_underlying(id)));
  return it->second;
}

HierarchyNode& ConceptHierarchy::mutable_node(NodeId id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw NotFoundError("unknown node " + std::to_string(to_underlying(id)));
  return it->second;
}

NodeId ConceptHierarchy::add_child(NodeId parent, std::string concept_name, Annotations annotations) {
  NodeId id = next_id_;
  add_child_with_id(parent, id, std::move(concept_name), std::move(annotations));
  return id;
}

void ConceptHierarchy::add_child_with_id(NodeId parent, NodeId id, std::string concept_name,
                                         Annotations annotations) {
  if (contains(id)) throw Error("duplicate node id " + std::to_string(to_underlying(id)));
  mutable_node(parent).children.push_back(id);
  HierarchyNode n;
  n.id = id;
  n.parent = parent;
  n.concept_name = std::move(concept_name);
  n.annotations = std::move(annotations);
  nodes_.emplace(id, std::move(n));
  if (to_underlying(id) >= to_underlying(next_id_)) next_id_ = NodeId{to_underlying(id) + 1};
}

std::vector<NodeId> ConceptHierarchy::remove_subtree(NodeId id) {
  if (id == root_) throw Error("cannot remove the root node");
  std::vector<NodeId> removed = subtree(id);
  auto& siblings = mutable_node(*node(id).parent).children;
  siblings.erase(std::remove(siblings.begin(), siblings.end(), id), siblings.end());
  for (NodeId r : removed) nodes_.erase(r);
  return removed;
}

std::vector<NodeId> ConceptHierarchy::subtree(NodeId id) const {
  std::vector<NodeId> out;
  if (!contains(id)) return out;
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    out.push_back(cur);
    const auto& ch = node(cur).children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<NodeId> ConceptHierarchy::preorder() const { return subtree(root_); }

std::vector<NodeId> ConceptHierarchy::nodes_of(std::string_view concept_name) const {
  std::vector<NodeId> out;
  for (NodeId id : preorder()) {
    if (node(id).concept_name == concept_name) out.push_back(id);
  }
  return out;
}

bool ConceptHierarchy::has_concept(std::string_view concept_name) const {
  return std::any_of(nodes_.begin(), nodes_.end(), [&](const auto& kv) { return kv.second.concept_name == concept_name; });
}

std::vector<std::string> ConceptHierarchy::concepts() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (NodeId id : preorder()) {
    const auto& c = node(id).concept_name;
    if (seen.insert(c).second) out.push_back(c);
  }
  return out;
}

std::vector<std::string> ConceptHierarchy::path_of(NodeId id) const {
  std::vector<std::string> out;
  std::optional<NodeId> cur = id;
  while (cur) {
    const auto& n = node(*cur);
    out.push_back(n.concept_name);
    cur = n.parent;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::optional<NodeId> ConceptHierarchy::child_with_concept(NodeId parent, std::string_view concept_name) const {
  for (NodeId c : node(parent).children) {
    if (node(c).concept_name == concept_name) return c;
  }
  return std::nullopt;
}

std::optional<NodeId> ConceptHierarchy::find_path(std::span<const std::string> path) const {
  if (path.empty() || nodes_.empty() || node(root_).concept_name != path.front()) return std::nullopt;
  NodeId cur = root_;
  for (std::size_t i = 1; i < path.size(); ++i) {
    auto next = child_with_concept(cur, path[i]);
    if (!next) return std::nullopt;
    cur = *next;
  }
  return cur;
}

std::size_t ConceptHierarchy::depth(NodeId id) const {
  std::size_t d = 0;
  for (auto p = node(id).parent; p; p = node(*p).parent) ++d;
  return d;
}

bool ConceptHierarchy::is_ancestor_or_self(NodeId ancestor, NodeId id) const {
  for (std::optional<NodeId> cur = id; cur; cur = node(*cur).parent) {
    if (*cur == ancestor) return true;
  }
  return false;
}

std::string ConceptHierarchy::to_text() const {
  std::string out = "axis " + axis_name_ + " " + quoted(title_) + "\n";
  std::function<void(NodeId, std::size_t)> emit = [&](NodeId id, std::size_t depth) {
    const auto& n = node(id);
    out.append(depth * 2, ' ');
    out += n.concept_name;
    if (!n.annotations.empty()) out += " " + n.annotations.to_string();
    out += '\n';
    for (NodeId c : n.children) emit(c, depth + 1);
  };
  if (!nodes_.empty()) emit(root_, 0);
  return out;
}

ConceptHierarchy parse_hierarchy(std::string_view text) {
  std::optional<std::pair<std::string, std::string>> header;
  std::optional<ConceptHierarchy> h;
  std::vector<NodeId> stack;  // stack[d] = last node at depth d
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::string_view content = trim(raw);
    if (content.empty() || content.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    const bool at_margin = !raw.empty() && raw.front() != ' ';
    if (at_margin && (content.rfind("axis ", 0) == 0 || content == "axis")) {
      if (header) throw ParseError("duplicate axis header", line_no, "line");
      if (h) throw ParseError("axis header must precede the concepts", line_no, "line");
      std::string_view rest = trim(content.substr(4));
      std::size_t sp = rest.find(' ');
      std::string name(rest.substr(0, sp));
      if (name.empty()) throw ParseError("axis header needs a name", line_no, "line");
      std::string title;
      if (sp != std::string_view::npos) {
        std::string_view t = trim(rest.substr(sp + 1));
        if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
        title = std::string(t);
      }
      header.emplace(std::move(name), std::move(title));
      if (end == text.size()) break;
      continue;
    }
    std::size_t indent = 0;
    while (indent < raw.size() && raw[indent] == ' ') ++indent;
    if (indent < raw.size() && raw[indent] == '\t') throw ParseError("tab in indentation", line_no, "line");
    if (indent % 2 != 0) throw ParseError("indentation must be a multiple of two spaces", line_no, "line");
    const std::size_t depth = indent / 2;

    std::string_view body = content;
    std::size_t ann_at = std::string_view::npos;
    for (std::size_t i = 0; i + 1 < body.size(); ++i) {
      if (body[i] == ' ' && body[i + 1] == '?') {
        ann_at = i;
        break;
      }
    }
    std::string name(trim(body.substr(0, ann_at)));
    Annotations ann;
    if (ann_at != std::string_view::npos) ann = parse_annotations(body.substr(ann_at), line_no);
    if (name.empty()) throw ParseError("empty concept name", line_no, "line");

    if (!h) {
      if (depth != 0) throw ParseError("first concept must not be indented", line_no, "line");
      h.emplace(header ? header->first : "A", header && !header->second.empty() ? header->second : name,
                name, std::move(ann));
      stack = {h->root()};
    } else {
      if (depth == 0) throw ParseError("a hierarchy has exactly one root", line_no, "line");
      if (depth > stack.size()) throw ParseError("indented more than one level below its parent", line_no, "line");
      stack.resize(depth);
      NodeId id = h->add_child(stack.back(), std::move(name), std::move(ann));
      stack.push_back(id);
    }
    if (end == text.size()) break;
  }
  if (!h) throw ParseError("empty hierarchy document", line_no, "line");
  return *std::move(h);
}

std::vector<std::string> parse_node_path(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t gt = text.find('>', start);
    std::string_view part = trim(text.substr(start, gt == std::string_view::npos ? gt : gt - start));
    if (part.empty()) throw ParseError("empty component in node path", start);
    out.emplace_back(part);
    if (gt == std::string_view::npos) break;
    start = gt + 1;
  }
  return out;
}

std::string format_node_path(std::span<const std::string> path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += " > ";
    out += path[i];
  }
  return out;
}

std::vector<std::string> DependencyGraph::successors(std::string_view concept_name) const {
  std::vector<std::string> out;
  auto it = edges.lower_bound({std::string(concept_name), std::string()});
  for (; it != edges.end() && it->first == concept_name; ++it) out.push_back(it->second);
  return out;
}

DependencyGraph dependency_graph(const ConceptHierarchy& h) {
  DependencyGraph g;
  for (NodeId id : h.preorder()) {
    const auto& n = h.node(id);
    g.nodes.insert(n.concept_name);
    if (n.parent) g.edges.emplace(n.concept_name, h.node(*n.parent).concept_name);
  }
  return g;
}

namespace {

// Tarjan's strongly connected components over the concept graph.
std::vector<std::vector<std::string>> strongly_connected(const DependencyGraph& g) {
  std::map<std::string, int> index, low;
  std::set<std::string> on_stack;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> out;
  int counter = 0;
  std::function<void(const std::string&)> visit = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (const auto& w : g.successors(v)) {
      if (!index.count(w)) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack.count(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::string> comp;
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
  };
  for (const auto& v : g.nodes) {
    if (!index.count(v)) visit(v);
  }
  return out;
}

// Shortest cycle through `start` staying inside `members`.
std::vector<std::string> cycle_through(const DependencyGraph& g, const std::string& start,
                                       const std::set<std::string>& members) {
  std::map<std::string, std::string> prev;
  std::deque<std::string> queue{start};
  std::set<std::string> seen{start};
  while (!queue.empty()) {
    std::string v = queue.front();
    queue.pop_front();
    for (const auto& w : g.successors(v)) {
      if (!members.count(w)) continue;
      if (w == start) {
        std::vector<std::string> path{start};
        for (std::string cur = v; cur != start; cur = prev[cur]) path.push_back(cur);
        std::reverse(path.begin() + 1, path.end());
        path.push_back(start);
        return path;
      }
      if (seen.insert(w).second) {
        prev[w] = v;
        queue.push_back(w);
      }
    }
  }
  return {};
}

}  // namespace

ValidationReport validate(const ConceptHierarchy& h) {
  ValidationReport report;
  for (NodeId id : h.preorder()) {
    std::set<std::string> seen;
    std::set<std::string> reported;
    for (NodeId c : h.node(id).children) {
      const auto& concept_name = h.node(c).concept_name;
      if (!seen.insert(concept_name).second && reported.insert(concept_name).second) {
        report.sibling_violations.push_back({id, concept_name});
      }
    }
  }
  DependencyGraph g = dependency_graph(h);
  for (const auto& comp : strongly_connected(g)) {
    const bool self_loop = comp.size() == 1 && g.edges.count({comp[0], comp[0]});
    if (comp.size() < 2 && !self_loop) continue;
    std::set<std::string> members(comp.begin(), comp.end());
    report.cycles.push_back(cycle_through(g, comp.front(), members));
  }
  std::sort(report.cycles.begin(), report.cycles.end());
  return report;
}

std::vector<std::string> ValidationReport::to_lines(const ConceptHierarchy& h) const {
  std::vector<std::string> out;
  for (const auto& v : sibling_violations) {
    out.push_back("SIBLING " + format_node_path(h.path_of(v.parent)) + " has duplicate child \"" + v.concept_name + "\"");
  }
  for (const auto& c : cycles) {
    std::string line = "CYCLE ";
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i) line += " -> ";
      line += c[i];
    }
    out.push_back(std::move(line));
  }
  return out;
}

std::vector<NodeId> parents(const ConceptHierarchy& h, std::string_view concept_name) {
  if (!h.has_concept(concept_name)) throw NotFoundError("unknown concept \"" + std::string(concept_name) + "\"");
  std::vector<NodeId> out;
  for (NodeId id : h.preorder()) {
    for (NodeId c : h.node(id).children) {
      if (h.node(c).concept_name == concept_name) {
        out.push_back(id);
        break;
      }
    }
  }
  return out;
}

bool is_more_specific(const DependencyGraph& g, std::string_view a, std::string_view b) {
  if (!g.contains(a)) throw NotFoundError("unknown concept \"" + std::string(a) + "\"");
  if (!g.contains(b)) throw NotFoundError("unknown concept \"" + std::string(b) + "\"");
  std::set<std::string> seen;
  std::deque<std::string> queue{std::string(a)};
  while (!queue.empty()) {
    std::string v = queue.front();
    queue.pop_front();
    for (const auto& w : g.successors(v)) {
      if (w == b) return true;
      if (seen.insert(w).second) queue.push_back(w);
    }
  }
  return false;
}

std::set<std::string> more_specific_closure(const DependencyGraph& g, std::string_view a) {
  // Reverse reachability: everything with a path to `a`.
  std::map<std::string, std::vector<std::string>> reverse;
  for (const auto& [child, parent] : g.edges) reverse[parent].push_back(child);
  std::set<std::string> out{std::string(a)};
  std::deque<std::string> queue{std::string(a)};
  while (!queue.empty()) {
    std::string v = queue.front();
    queue.pop_front();
    for (const auto& w : reverse[v]) {
      if (out.insert(w).second) queue.push_back(w);
    }
  }
  return out;
}

}  // namespace semidx
