#include "semidx/multiaxial.hpp"

#include <algorithm>
#include <cctype>

#include "semidx/error.hpp"

namespace semidx {

std::string MultiaxialDescriptor::to_string() const {
  std::string out = "[";
  for (std::size_t i = 0; i < bindings.size(); ++i) {
    if (i) out += ',';
    out += bindings[i].to_string();
  }
  return out + "]";
}

std::string MultiaxialExpression::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    if (i) out += ',';
    out += descriptors[i].to_string();
  }
  return out;
}

bool Situation::has_axis(std::string_view axis) const {
  return std::any_of(bindings.begin(), bindings.end(), [&](const AxisBinding& b) { return b.axis == axis; });
}

std::vector<AxisBinding> Situation::normalized() const {
  std::vector<AxisBinding> out = bindings;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

bool axis_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool axis_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

class Parser {
 public:
  Parser(std::string_view text, const std::set<std::string>* known) : text_(text), known_(known) {}

  MultiaxialExpression expression() {
    MultiaxialExpression e;
    e.descriptors.push_back(descriptor());
    while (peek() == ',') {
      ++pos_;
      e.descriptors.push_back(descriptor());
    }
    finish();
    return e;
  }

  MultiaxialDescriptor single() {
    MultiaxialDescriptor d = descriptor();
    finish();
    return d;
  }

 private:
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    if (peek() != c) {
      if (pos_ >= text_.size()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
      throw ParseError(std::string("expected '") + c + "' but found '" + text_[pos_] + "'", pos_);
    }
    ++pos_;
  }

  void finish() {
    if (peek() != '\0') throw ParseError("trailing characters", pos_);
  }

  MultiaxialDescriptor descriptor() {
    MultiaxialDescriptor d;
    expect('[');
    d.bindings.push_back(binding());
    while (peek() == ',') {
      ++pos_;
      d.bindings.push_back(binding());
    }
    expect(']');
    for (std::size_t i = 0; i < d.bindings.size(); ++i) {
      for (std::size_t j = i + 1; j < d.bindings.size(); ++j) {
        if (d.bindings[i].axis == d.bindings[j].axis) {
          throw ParseError("axis " + d.bindings[i].axis + " bound twice in one descriptor", pos_);
        }
      }
    }
    return d;
  }

  AxisBinding binding() {
    expect('(');
    skip_ws();
    std::size_t start = pos_;
    if (pos_ >= text_.size() || !axis_start(text_[pos_])) throw ParseError("expected axis name", pos_);
    while (pos_ < text_.size() && axis_char(text_[pos_])) ++pos_;
    std::string axis(text_.substr(start, pos_ - start));
    if (known_ && !known_->count(axis)) throw NotFoundError("unknown axis " + axis);
    skip_ws();
    std::size_t key_start = pos_;
    std::size_t close = text_.find(']', pos_);
    if (close == std::string_view::npos) throw ParseError("unterminated key", text_.size());
    Key key;
    try {
      key = parse_key(text_.substr(key_start, close + 1 - key_start));
    } catch (const ParseError& e) {
      throw ParseError("bad key for axis " + axis, key_start + e.position());
    }
    pos_ = close + 1;
    expect(')');
    return {std::move(axis), std::move(key)};
  }

  std::string_view text_;
  const std::set<std::string>* known_;
  std::size_t pos_ = 0;
};

bool unify(const Key& query, const Key& target, MatchMode mode) {
  return mode == MatchMode::descriptor_as_query ? partially_unifiable(query, target)
                                                : partially_unifiable(target, query);
}

}  // namespace

bool is_valid_axis_name(std::string_view name) {
  if (name.empty() || !axis_start(name.front())) return false;
  return std::all_of(name.begin(), name.end(), axis_char);
}

MultiaxialExpression parse_multiaxial(std::string_view text, const std::set<std::string>* known_axes) {
  return Parser(text, known_axes).expression();
}

MultiaxialDescriptor parse_descriptor(std::string_view text, const std::set<std::string>* known_axes) {
  return Parser(text, known_axes).single();
}

bool descriptor_matches(const MultiaxialDescriptor& d, std::span<const AxisBinding> situation, MatchMode mode) {
  for (const AxisBinding& want : d.bindings) {
    bool found = false;
    for (const AxisBinding& have : situation) {
      if (have.axis == want.axis && unify(want.key, have.key, mode)) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

bool descriptor_matches(const MultiaxialDescriptor& d, const Situation& s, MatchMode mode) {
  return descriptor_matches(d, std::span<const AxisBinding>(s.bindings), mode);
}

bool expression_matches(const MultiaxialExpression& e, std::span<const AxisBinding> situation, MatchMode mode) {
  return std::any_of(e.descriptors.begin(), e.descriptors.end(),
                     [&](const MultiaxialDescriptor& d) { return descriptor_matches(d, situation, mode); });
}

bool descriptor_subsumes(const MultiaxialDescriptor& d1, const MultiaxialDescriptor& d2) {
  for (const AxisBinding& a : d1.bindings) {
    auto it = std::find_if(d2.bindings.begin(), d2.bindings.end(),
                           [&](const AxisBinding& b) { return b.axis == a.axis; });
    if (it == d2.bindings.end() || !partially_unifiable(a.key, it->key)) return false;
  }
  return true;
}

Situation parse_situation(std::string_view text, const std::set<std::string>* known_axes) {
  Situation s;
  for (const auto& d : parse_multiaxial(text, known_axes).descriptors) {
    s.bindings.insert(s.bindings.end(), d.bindings.begin(), d.bindings.end());
  }
  s.source = std::string(text);
  return s;
}

}  // namespace semidx
