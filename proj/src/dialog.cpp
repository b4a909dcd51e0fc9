#include "semidx/dialog.hpp"

#include <algorithm>

#include "semidx/error.hpp"

namespace semidx {

std::string to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::active: return "active";
    case SessionStatus::complete: return "complete";
    case SessionStatus::committed: return "committed";
  }
  return "?";
}

DialogSession::DialogSession(std::string id, std::shared_ptr<const IndexedHierarchy> index, std::string subject,
                             NextQuestionStrategy strategy)
    : id_(std::move(id)), index_(std::move(index)), subject_(std::move(subject)), strategy_(std::move(strategy)) {
  if (!index_) throw Error("dialog session without an index");
  state_ = initial();
}

DialogSession::State DialogSession::initial() const {
  State s;
  const NodeId root = index_->hierarchy.root();
  s.affirmed.insert(root);
  if (!index_->hierarchy.node(root).children.empty()) s.pending.push_back(root);
  return s;
}

SessionStatus DialogSession::status() const {
  if (committed_) return SessionStatus::committed;
  return state_.pending.empty() ? SessionStatus::complete : SessionStatus::active;
}

std::size_t DialogSession::next_index(const State& s) const {
  if (!strategy_ || s.pending.size() < 2) return 0;
  std::size_t i = strategy_(s.pending);
  if (i >= s.pending.size()) throw Error("question strategy picked a node that is not pending");
  return i;
}

std::optional<Question> DialogSession::question() const {
  if (state_.pending.empty() || committed_) return std::nullopt;
  const ConceptHierarchy& h = index_->hierarchy;
  const NodeId id = state_.pending[next_index(state_)];
  const HierarchyNode& n = h.node(id);
  Question q;
  q.node = id;
  q.concept_name = n.concept_name;
  q.path = h.path_of(id);
  q.key = index_->node_key(id);
  q.type = n.annotations.question_type();
  q.optional = n.annotations.optional;
  q.negatable = n.annotations.negatable;
  q.default_child = n.annotations.default_child;
  q.extras = n.annotations.extras;
  for (NodeId c : n.children) {
    const HierarchyNode& cn = h.node(c);
    q.options.push_back({c, cn.concept_name, index_->node_key(c), !cn.children.empty()});
  }
  return q;
}

bool DialogSession::below_negated(const State& s, NodeId node) const {
  const ConceptHierarchy& h = index_->hierarchy;
  for (std::optional<NodeId> at = node; at; at = h.node(*at).parent) {
    if (s.negated.count(*at)) return true;
  }
  return false;
}

void DialogSession::check(const State& s, NodeId node, const Selection& sel) const {
  const ConceptHierarchy& h = index_->hierarchy;
  if (committed_) throw ValidationError("session " + id_ + " is already committed");
  if (!h.contains(node)) throw NotFoundError("unknown node " + std::to_string(to_underlying(node)));
  if (below_negated(s, node)) {
    throw ConsistencyError("\"" + h.node(node).concept_name + "\" lies below a negated answer");
  }
  if (s.pending.empty()) throw ValidationError("session " + id_ + " has no open question");
  if (s.pending[next_index(s)] != node) {
    throw ValidationError("\"" + h.node(node).concept_name + "\" is not the current question");
  }
  const HierarchyNode& n = h.node(node);
  const Annotations& ann = n.annotations;
  std::set<std::string> seen;
  for (const auto* names : {&sel.affirm, &sel.negate}) {
    for (const auto& name : *names) {
      if (!h.child_with_concept(node, name)) {
        throw ValidationError("\"" + name + "\" is not an option of \"" + n.concept_name + "\"");
      }
      if (!seen.insert(name).second) throw ValidationError("\"" + name + "\" selected twice");
    }
  }
  if (sel.skip) {
    if (!sel.affirm.empty() || !sel.negate.empty()) throw ValidationError("a skip cannot select options");
    if (!ann.optional && !ann.default_child) {
      throw ValidationError("\"" + n.concept_name + "\" is not optional");
    }
    return;
  }
  if (!sel.negate.empty() && !ann.negatable) {
    throw ValidationError("options of \"" + n.concept_name + "\" cannot be negated");
  }
  if (ann.question_type() == QuestionType::single) {
    if (sel.affirm.size() > 1) throw ValidationError("\"" + n.concept_name + "\" takes exactly one option");
    if (sel.affirm.empty() && sel.negate.empty()) {
      throw ValidationError("\"" + n.concept_name + "\" takes exactly one option");
    }
  }
}

void DialogSession::apply(State& s, const Answer& a) const {
  const ConceptHierarchy& h = index_->hierarchy;
  const std::size_t at = next_index(s);
  s.pending.erase(s.pending.begin() + static_cast<std::ptrdiff_t>(at));
  s.answered.insert(a.node);
  if (a.selection.value) s.values[a.node] = *a.selection.value;

  std::vector<std::string> affirm = a.selection.affirm;
  if (a.selection.skip) {
    s.skipped.insert(a.node);
    if (const auto& d = h.node(a.node).annotations.default_child; d && h.child_with_concept(a.node, *d)) {
      affirm.push_back(*d);
    }
  }
  std::vector<NodeId> descend;
  for (NodeId c : h.node(a.node).children) {
    const std::string& name = h.node(c).concept_name;
    if (std::find(affirm.begin(), affirm.end(), name) != affirm.end()) {
      s.affirmed.insert(c);
      if (!h.node(c).children.empty()) descend.push_back(c);
    }
    if (std::find(a.selection.negate.begin(), a.selection.negate.end(), name) != a.selection.negate.end()) {
      s.negated.insert(c);
    }
  }
  s.pending.insert(s.pending.begin() + static_cast<std::ptrdiff_t>(at), descend.begin(), descend.end());
}

void DialogSession::answer(NodeId node, const Selection& selection) {
  check(state_, node, selection);
  Answer a{node, selection};
  State next = state_;
  apply(next, a);
  answers_.push_back(std::move(a));
  state_ = std::move(next);
}

void DialogSession::back() {
  if (committed_) throw ValidationError("session " + id_ + " is already committed");
  if (answers_.empty()) throw ValidationError("nothing to go back to");
  answers_.pop_back();
  State s = initial();
  for (const Answer& a : answers_) apply(s, a);
  state_ = std::move(s);
}

Episode DialogSession::episode() const {
  if (!state_.pending.empty()) throw ValidationError("session " + id_ + " is not complete");
  const ConceptHierarchy& h = index_->hierarchy;
  Episode e;
  e.subject = subject_;
  for (NodeId id : h.preorder()) {
    const HierarchyNode& n = h.node(id);
    InstanceRecord r;
    r.axis = index_->axis();
    r.node_key = index_->node_key(id);
    r.path = h.path_of(id);
    if (auto v = state_.values.find(id); v != state_.values.end()) r.value = v->second;
    if (state_.negated.count(id)) {
      r.polarity = Polarity::negated;
      e.instances.push_back(std::move(r));
      continue;
    }
    if (!state_.affirmed.count(id)) continue;
    const bool leaf = std::none_of(n.children.begin(), n.children.end(),
                                   [&](NodeId c) { return state_.affirmed.count(c) != 0; });
    if (leaf || r.value) e.instances.push_back(std::move(r));
  }
  return e;
}

void DialogSession::mark_committed() {
  if (status() != SessionStatus::complete) throw ValidationError("session " + id_ + " cannot be committed now");
  committed_ = true;
}

bool DialogSession::consistent() const {
  const ConceptHierarchy& h = index_->hierarchy;
  for (NodeId id : state_.affirmed) {
    if (below_negated(state_, id)) return false;
    auto parent = h.node(id).parent;
    if (parent && !state_.affirmed.count(*parent)) return false;
  }
  for (NodeId id : state_.negated) {
    if (state_.affirmed.count(id)) return false;
  }
  std::set<NodeId> seen;
  for (NodeId id : state_.pending) {
    if (!seen.insert(id).second) return false;
    if (!state_.affirmed.count(id) || state_.answered.count(id) || below_negated(state_, id)) return false;
  }
  return true;
}

}  // namespace semidx
