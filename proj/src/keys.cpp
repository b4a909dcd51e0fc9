#include "semidx/keys.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "semidx/error.hpp"

namespace semidx {

Key::Key(std::vector<KeyElement> elements) : elements_(std::move(elements)) {
  if (elements_.empty()) throw Error("a key needs at least one element");
}

Key::Key(std::initializer_list<KeyElement> elements) : Key(std::vector<KeyElement>(elements)) {}

bool Key::has_variables() const {
  return std::any_of(elements_.begin(), elements_.end(), [](KeyElement e) { return e.is_variable(); });
}

Key Key::appended(KeyElement e) const {
  std::vector<KeyElement> out = elements_;
  out.push_back(e);
  return Key(std::move(out));
}

std::string Key::to_string() const {
  std::string out = "[";
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (i) out += ',';
    if (elements_[i].is_variable()) {
      out += 'x';
    } else {
      out += std::to_string(elements_[i].value());
    }
  }
  out += ']';
  return out;
}

std::ostream& operator<<(std::ostream& os, const Key& k) { return os << k.to_string(); }

Key parse_key(std::string_view text) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  skip_ws();
  if (pos >= text.size() || text[pos] != '[') throw ParseError("expected '['", pos);
  ++pos;
  std::vector<KeyElement> elements;
  while (true) {
    skip_ws();
    if (pos >= text.size()) throw ParseError("unterminated key", pos);
    char c = text[pos];
    if (c == ']' && elements.empty()) throw ParseError("empty key", pos);
    if (c == 'x') {
      elements.push_back(KeyElement::variable());
      ++pos;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::uint64_t v = 0;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        auto d = static_cast<std::uint64_t>(text[pos] - '0');
        if (v > (std::numeric_limits<std::uint64_t>::max() - d) / 10) {
          throw ParseError("constant out of range", pos);
        }
        v = v * 10 + d;
        ++pos;
      }
      elements.push_back(KeyElement::constant(v));
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", pos);
    }
    skip_ws();
    if (pos >= text.size()) throw ParseError("unterminated key", pos);
    if (text[pos] == ',') {
      ++pos;
      continue;
    }
    if (text[pos] == ']') {
      ++pos;
      break;
    }
    throw ParseError(std::string("expected ',' or ']' but found '") + text[pos] + "'", pos);
  }
  skip_ws();
  if (pos != text.size()) throw ParseError("trailing characters after key", pos);
  return Key(std::move(elements));
}

Key initial_key(const Key& k, std::size_t m) {
  if (m < 1 || m > k.size()) {
    throw Error("initial key length " + std::to_string(m) + " out of range for " + k.to_string());
  }
  return Key(std::vector<KeyElement>(k.begin(), k.begin() + static_cast<std::ptrdiff_t>(m)));
}

bool is_instance(const Key& k1, const Key& k2) {
  if (k1.size() != k2.size()) return false;
  for (std::size_t i = 0; i < k1.size(); ++i) {
    if (k2[i].is_variable()) continue;
    if (k1[i] != k2[i]) return false;
  }
  return true;
}

bool is_partial_instance(const Key& k1, const Key& k2) {
  const std::size_t n = std::min(k1.size(), k2.size());
  bool substituted = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (k1[i].is_constant() && k2[i].is_constant() && k1[i] != k2[i]) return false;
    if (k1[i].is_variable() && k2[i].is_constant()) substituted = true;
  }
  return substituted;
}

bool partially_unifiable(const Key& k1, const Key& k2) {
  if (k1.size() > k2.size()) return false;
  for (std::size_t i = 0; i < k1.size(); ++i) {
    if (!k1[i].compatible(k2[i])) return false;
  }
  return true;
}

bool instances_overlap(const Key& k1, const Key& k2) {
  return k1.size() == k2.size() && partially_unifiable(k1, k2);
}

Key generalize(std::span<const Key> keys) {
  if (keys.empty()) throw Error("generalization needs at least one key");
  std::size_t longest = 0;
  for (const Key& k : keys) longest = std::max(longest, k.size());
  std::vector<KeyElement> out;
  out.reserve(longest);
  for (std::size_t i = 0; i < longest; ++i) {
    bool seen = false;
    KeyElement merged;
    for (const Key& k : keys) {
      if (k.size() <= i) continue;
      if (!seen) {
        merged = k[i];
        seen = true;
      } else if (merged != k[i]) {
        merged = KeyElement::variable();
      }
    }
    out.push_back(merged);
  }
  return Key(std::move(out));
}

Key expand(const Key& k1, const Key& k2) {
  if (k1.size() > k2.size()) {
    throw Error("cannot expand " + k1.to_string() + " towards shorter key " + k2.to_string());
  }
  std::vector<KeyElement> out(k1.begin(), k1.end());
  out.insert(out.end(), k2.begin() + static_cast<std::ptrdiff_t>(k1.size()), k2.end());
  return Key(std::move(out));
}

std::size_t common_prefix_length(const Key& a, const Key& b) {
  const std::size_t n = std::min(a.size(), b.size());
  std::size_t i = 0;
  while (i < n && a[i] == b[i]) ++i;
  return i;
}

}  // namespace semidx

std::size_t std::hash<semidx::Key>::operator()(const semidx::Key& k) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (semidx::KeyElement e : k) {
    std::uint64_t v = e.is_variable() ? ~0ull : e.value();
    h ^= std::hash<std::uint64_t>{}(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}
