#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semidx {

// One position of a key: a natural-number constant or the independent
// variable `x`. Every variable occurrence is unrelated to every other one.
class KeyElement {
 public:
  constexpr KeyElement() = default;

  static constexpr KeyElement constant(std::uint64_t v) { return KeyElement(v, false); }
  static constexpr KeyElement variable() { return KeyElement(0, true); }

  constexpr bool is_variable() const { return variable_; }
  constexpr bool is_constant() const { return !variable_; }
  // Only meaningful for constants.
  constexpr std::uint64_t value() const { return value_; }

  // Two elements can be made equal by substitution.
  constexpr bool compatible(KeyElement other) const {
    return variable_ || other.variable_ || value_ == other.value_;
  }

  friend constexpr bool operator==(KeyElement, KeyElement) = default;
  friend constexpr auto operator<=>(KeyElement, KeyElement) = default;

 private:
  constexpr KeyElement(std::uint64_t v, bool var) : value_(v), variable_(var) {}

  std::uint64_t value_ = 0;
  bool variable_ = false;
};

// Shorthand used heavily in tests and literals.
inline constexpr KeyElement X = KeyElement::variable();

// An immutable, non-empty sequence of key elements. Canonical text form is
// `[e1,...,en]` with `x` for variables.
class Key {
 public:
  Key() = default;
  explicit Key(std::vector<KeyElement> elements);
  Key(std::initializer_list<KeyElement> elements);
  // Convenience: `Key{0, 1, X}` style construction from integers and X.
  template <typename... Ts>
  static Key of(Ts... ts) {
    return Key(std::vector<KeyElement>{to_element(ts)...});
  }

  std::size_t size() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }
  // 0-based element access.
  KeyElement operator[](std::size_t i) const { return elements_[i]; }
  std::span<const KeyElement> elements() const { return elements_; }
  auto begin() const { return elements_.begin(); }
  auto end() const { return elements_.end(); }

  bool has_variables() const;

  // New key with `e` appended.
  Key appended(KeyElement e) const;

  std::string to_string() const;

  friend bool operator==(const Key&, const Key&) = default;
  friend auto operator<=>(const Key& a, const Key& b) { return a.elements_ <=> b.elements_; }

 private:
  static constexpr KeyElement to_element(KeyElement e) { return e; }
  static constexpr KeyElement to_element(int v) { return KeyElement::constant(static_cast<std::uint64_t>(v)); }
  static constexpr KeyElement to_element(std::uint64_t v) { return KeyElement::constant(v); }

  std::vector<KeyElement> elements_;
};

std::ostream& operator<<(std::ostream& os, const Key& k);

// Parses `[e1, ..., en]`; element = digits | 'x'. Whitespace around elements
// is ignored. Throws ParseError with the offending position.
Key parse_key(std::string_view text);

// First `m` elements of `k`; requires 1 <= m <= size(k).
Key initial_key(const Key& k, std::size_t m);

// k1 is in inst(k2): equal length, and wherever k2 holds a constant k1
// holds the same constant.
bool is_instance(const Key& k1, const Key& k2);

// Some variable of k1 lines up with a constant of k2 and no aligned pair of
// constants disagrees (over the common prefix).
bool is_partial_instance(const Key& k1, const Key& k2);

// Some instance of k1 is an initial key of some instance of k2. Closed
// form: size(k1) <= size(k2) and k1 is positionwise compatible with k2.
bool partially_unifiable(const Key& k1, const Key& k2);

// inst(k1) and inst(k2) intersect: equal length and positionwise compatible.
bool instances_overlap(const Key& k1, const Key& k2);

// Positionwise merge to the length of the longest key: a constant survives
// only where every key long enough to reach the position agrees on it.
Key generalize(std::span<const Key> keys);

// k1 filled up with the trailing elements of k2; requires size(k1) <= size(k2).
Key expand(const Key& k1, const Key& k2);

// Number of leading positions on which the two keys hold equal elements.
std::size_t common_prefix_length(const Key& a, const Key& b);

}  // namespace semidx

template <>
struct std::hash<semidx::Key> {
  std::size_t operator()(const semidx::Key& k) const noexcept;
};
