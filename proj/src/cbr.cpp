#include "semidx/cbr.hpp"

#include <algorithm>
#include <cmath>

#include "semidx/error.hpp"
#include "semidx/store.hpp"

namespace semidx {

namespace {

double directed(const std::vector<AxisBinding>& from, const std::vector<AxisBinding>& to) {
  if (from.empty()) return 0;
  double sum = 0;
  for (const auto& a : from) {
    double best = 0;
    for (const auto& b : to) {
      if (b.axis != a.axis) continue;
      const double len = static_cast<double>(std::max(a.key.size(), b.key.size()));
      best = std::max(best, static_cast<double>(common_prefix_length(a.key, b.key)) / len);
    }
    sum += best;
  }
  return sum / static_cast<double>(from.size());
}

// Equal similarities reached through different sums differ in the last
// bits; rounding lets them tie so the id decides.
double settle(double score) { return std::round(score * 1e12) / 1e12; }

}  // namespace

double default_similarity(const Situation& a, const Situation& b) {
  const auto x = a.normalized();
  const auto y = b.normalized();
  if (x.empty() && y.empty()) return 1.0;
  return (directed(x, y) + directed(y, x)) / 2.0;
}

SimilarityMeasure default_measure() { return {"prefix", default_similarity}; }

double case_score(const CaseView& v, const Situation& query, const SimilarityMeasure& m, SequenceMode mode) {
  if (v.problem.empty()) return 0;
  if (mode == SequenceMode::latest) return settle(m.fn(query, v.problem.back()));
  double sum = 0;
  for (const auto& s : v.problem) sum += m.fn(query, s);
  return settle(sum / static_cast<double>(v.problem.size()));
}

std::vector<ScoredCase> rank_cases(std::span<const CaseView> cases, const Situation& query, std::size_t k,
                                   const SimilarityMeasure& m, SequenceMode mode) {
  std::vector<ScoredCase> all;
  all.reserve(cases.size());
  for (const auto& v : cases) all.push_back({v.c, case_score(v, query, m, mode)});
  auto better = [](const ScoredCase& a, const ScoredCase& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.c.id < b.c.id;
  };
  const std::size_t n = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), better);
  all.resize(n);
  return all;
}

std::vector<CaseView> load_case_views(const Store& store) {
  std::vector<CaseView> out;
  for (Case& c : store.cases()) {
    CaseView v;
    std::vector<Episode> eps;
    for (const auto& ref : c.problem) {
      auto e = store.get_episode(ref);
      if (!e) throw NotFoundError("case " + c.id + " refers to missing episode " + ref.id);
      eps.push_back(std::move(*e));
    }
    std::stable_sort(eps.begin(), eps.end(),
                     [](const Episode& a, const Episode& b) { return a.timestamp < b.timestamp; });
    for (const auto& e : eps) v.problem.push_back(e.situation());
    v.c = std::move(c);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<ScoredCase> retrieve(const Store& store, const Situation& query, std::size_t k,
                                 const SimilarityMeasure& m, SequenceMode mode) {
  if (k == 0) throw ValidationError("k must be positive");
  auto views = load_case_views(store);
  return rank_cases(views, query, k, m, mode);
}

}  // namespace semidx
