#pragma once

// Brute-force reference semantics for the key relations. Everything here is
// derived from the definitions by enumerating substitutions; nothing calls the
// closed forms in keys.cpp.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "semidx/keys.hpp"

namespace oracle {

using Elem = std::optional<std::uint64_t>;  // nullopt = variable
using Word = std::vector<Elem>;

inline Word word_of(const semidx::Key& k) {
  Word w;
  for (auto e : k) w.push_back(e.is_variable() ? Elem{} : Elem{e.value()});
  return w;
}

// Constants occurring in the inputs plus one constant that does not occur.
inline std::vector<std::uint64_t> alphabet_for(std::initializer_list<const semidx::Key*> keys) {
  std::set<std::uint64_t> consts;
  for (const auto* k : keys) {
    for (auto e : *k) {
      if (e.is_constant()) consts.insert(e.value());
    }
  }
  std::uint64_t fresh = 0;
  while (consts.count(fresh)) ++fresh;
  std::vector<std::uint64_t> out(consts.begin(), consts.end());
  out.push_back(fresh);
  return out;
}

// inst(k): every way of leaving each variable alone or substituting it by a
// constant from the alphabet. Variables are substituted independently.
inline std::vector<Word> instances(const Word& k, const std::vector<std::uint64_t>& alphabet) {
  std::vector<Word> out{Word{}};
  for (const Elem& e : k) {
    std::vector<Word> next;
    for (const Word& prefix : out) {
      if (e) {
        Word w = prefix;
        w.push_back(e);
        next.push_back(std::move(w));
      } else {
        Word keep = prefix;
        keep.push_back(Elem{});
        next.push_back(std::move(keep));
        for (auto c : alphabet) {
          Word w = prefix;
          w.push_back(Elem{c});
          next.push_back(std::move(w));
        }
      }
    }
    out = std::move(next);
  }
  return out;
}

inline bool is_initial(const Word& a, const Word& b) {
  return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

inline bool partially_unifiable(const semidx::Key& k1, const semidx::Key& k2) {
  auto alpha = alphabet_for({&k1, &k2});
  auto i1 = instances(word_of(k1), alpha);
  auto i2 = instances(word_of(k2), alpha);
  for (const auto& a : i1) {
    for (const auto& b : i2) {
      if (is_initial(a, b)) return true;
    }
  }
  return false;
}

inline bool instances_overlap(const semidx::Key& k1, const semidx::Key& k2) {
  auto alpha = alphabet_for({&k1, &k2});
  auto i1 = instances(word_of(k1), alpha);
  auto i2 = instances(word_of(k2), alpha);
  std::set<Word> s2(i2.begin(), i2.end());
  return std::any_of(i1.begin(), i1.end(), [&](const Word& w) { return s2.count(w) != 0; });
}

inline bool is_instance(const semidx::Key& k1, const semidx::Key& k2) {
  auto alpha = alphabet_for({&k1, &k2});
  auto i2 = instances(word_of(k2), alpha);
  Word w1 = word_of(k1);
  return std::find(i2.begin(), i2.end(), w1) != i2.end();
}

// Some non-empty set of k1's variables, each replaced by the constant k2
// holds at that position, leaves no disagreeing constant pair.
inline bool is_partial_instance(const semidx::Key& k1, const semidx::Key& k2) {
  Word a = word_of(k1), b = word_of(k2);
  const std::size_t n = std::min(a.size(), b.size());
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    if (!a[i] && b[i]) candidates.push_back(i);
  }
  for (std::uint64_t mask = 1; mask < (1ull << candidates.size()); ++mask) {
    Word s = a;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (mask & (1ull << j)) s[candidates[j]] = b[candidates[j]];
    }
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (s[i] && b[i] && *s[i] != *b[i]) ok = false;
    }
    if (ok) return true;
  }
  return false;
}

// Generalization straight from the case definition.
inline semidx::Key generalize(const std::vector<semidx::Key>& keys) {
  std::size_t longest = 0;
  for (const auto& k : keys) longest = std::max(longest, k.size());
  std::vector<semidx::KeyElement> out;
  for (std::size_t i = 0; i < longest; ++i) {
    std::set<Elem> seen;
    for (const auto& k : keys) {
      if (k.size() > i) seen.insert(word_of(k)[i]);
    }
    if (seen.size() == 1 && *seen.begin()) {
      out.push_back(semidx::KeyElement::constant(**seen.begin()));
    } else {
      out.push_back(semidx::KeyElement::variable());
    }
  }
  return semidx::Key(out);
}

}  // namespace oracle
