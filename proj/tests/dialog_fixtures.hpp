#pragma once

// Random dialog annotations and answers for the session suites.

#include "generators.hpp"
#include "semidx/dialog.hpp"

namespace gen {

// Adds random dialog annotations to every inner node of a generated tree.
inline std::string annotate(Rng& rng, const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  auto indent = [](const std::string& l) { return l.find_first_not_of(' '); };
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    if (line.rfind("axis ", 0) != 0 && i + 1 < lines.size() && indent(lines[i + 1]) == indent(line) + 2) {
      line += chance(rng, 0.5) ? " ?multi" : " ?single";
      if (chance(rng, 0.3)) line += " ?optional";
      if (chance(rng, 0.4)) line += " ?negatable";
      if (chance(rng, 0.15)) line += " ?default=" + lines[i + 1].substr(indent(lines[i + 1]));
    }
    out += line + "\n";
  }
  return out;
}

inline semidx::Selection selection(Rng& rng, const semidx::Question& q) {
  semidx::Selection s;
  if ((q.optional || q.default_child) && chance(rng, 0.2)) {
    s.skip = true;
    return s;
  }
  std::vector<std::string> names;
  for (const auto& o : q.options) names.push_back(o.concept_name);
  std::shuffle(names.begin(), names.end(), rng);
  if (q.type == semidx::QuestionType::single) {
    s.affirm.push_back(names.front());
    if (q.negatable && names.size() > 1 && chance(rng, 0.3)) s.negate.push_back(names.back());
  } else {
    for (const auto& n : names) {
      if (chance(rng, 0.5)) {
        s.affirm.push_back(n);
      } else if (q.negatable && chance(rng, 0.5)) {
        s.negate.push_back(n);
      }
    }
  }
  if (chance(rng, 0.1)) s.value = "v" + std::to_string(uniform(rng, 0, 9));
  return s;
}

}  // namespace gen
