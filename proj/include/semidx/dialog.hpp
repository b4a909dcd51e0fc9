#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "semidx/episode.hpp"
#include "semidx/indexer.hpp"

namespace semidx {

enum class SessionStatus { active, complete, committed };

std::string to_string(SessionStatus s);

struct QuestionOption {
  NodeId node{};
  std::string concept_name;
  Key key;
  bool has_children = false;
};

// The current question: which children of `node` apply.
struct Question {
  NodeId node{};
  std::string concept_name;
  std::vector<std::string> path;
  Key key;
  QuestionType type = QuestionType::single;
  bool optional = false;
  bool negatable = false;
  std::optional<std::string> default_child;
  std::vector<std::pair<std::string, std::string>> extras;
  std::vector<QuestionOption> options;
};

// Children are named by concept, which is unambiguous among siblings.
struct Selection {
  std::vector<std::string> affirm;
  std::vector<std::string> negate;
  bool skip = false;
  std::optional<std::string> value;

  friend bool operator==(const Selection&, const Selection&) = default;
};

struct Answer {
  NodeId node{};
  Selection selection;

  friend bool operator==(const Answer&, const Answer&) = default;
};

// Picks the next question among the pending nodes (depth-first order, the
// default choice first). Returns an index into `pending`.
using NextQuestionStrategy = std::function<std::size_t(std::span<const NodeId> pending)>;

// Depth-first questioning over one indexed axis. The state is a pure
// function of the recorded answers; back() drops the last answer and
// replays the rest.
class DialogSession {
 public:
  DialogSession(std::string id, std::shared_ptr<const IndexedHierarchy> index, std::string subject = {},
                NextQuestionStrategy strategy = {});

  const std::string& id() const { return id_; }
  const std::string& subject() const { return subject_; }
  const IndexedHierarchy& index() const { return *index_; }
  SessionStatus status() const;
  std::optional<Question> question() const;
  const std::vector<Answer>& answers() const { return answers_; }
  const std::vector<NodeId>& pending() const { return state_.pending; }
  const std::set<NodeId>& affirmed() const { return state_.affirmed; }
  const std::set<NodeId>& negated() const { return state_.negated; }

  // Throws ConsistencyError for a node below a negated node, ValidationError
  // for any other unacceptable answer; the session is unchanged then.
  void answer(NodeId node, const Selection& selection);
  void back();

  // Most specific affirmed nodes plus explicit negations, in preorder.
  // Requires a complete session.
  Episode episode() const;
  void mark_committed();

  // No affirmed node lies below a negated one and every pending node is
  // affirmed, unanswered and not below a negated node.
  bool consistent() const;

 private:
  struct State {
    std::vector<NodeId> pending;
    std::set<NodeId> affirmed;
    std::set<NodeId> negated;
    std::set<NodeId> skipped;
    std::map<NodeId, std::string> values;
    std::set<NodeId> answered;
  };

  std::size_t next_index(const State& s) const;
  void check(const State& s, NodeId node, const Selection& sel) const;
  void apply(State& s, const Answer& a) const;
  bool below_negated(const State& s, NodeId node) const;
  State initial() const;

  std::string id_;
  std::shared_ptr<const IndexedHierarchy> index_;
  std::string subject_;
  NextQuestionStrategy strategy_;
  std::vector<Answer> answers_;
  State state_;
  bool committed_ = false;
};

}  // namespace semidx
