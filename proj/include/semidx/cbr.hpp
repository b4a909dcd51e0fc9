#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "semidx/episode.hpp"
#include "semidx/multiaxial.hpp"

namespace semidx {

class Store;

// Expected to be symmetric with values in [0,1]; nothing else is assumed.
struct SimilarityMeasure {
  std::string name;
  std::function<double(const Situation&, const Situation&)> fn;
};

// Per affirmed binding, the best match on the same axis scores
// common-prefix length / longer length; binding scores are averaged per side
// and the two sides averaged. Two empty situations are identical.
double default_similarity(const Situation& a, const Situation& b);
SimilarityMeasure default_measure();

enum class SequenceMode {
  latest,        // compare against the problem's most recent episode
  mean_aligned,  // mean similarity over all problem episodes
};

struct ScoredCase {
  Case c;
  double score = 0;

  friend bool operator==(const ScoredCase&, const ScoredCase&) = default;
};

// A case together with the situations of its problem episodes, oldest first.
struct CaseView {
  Case c;
  std::vector<Situation> problem;
};

// Rounded to 12 decimals, so equal similarities compare equal.
double case_score(const CaseView& v, const Situation& query, const SimilarityMeasure& m,
                  SequenceMode mode = SequenceMode::latest);

// Top k by score, descending; ties by ascending case id.
std::vector<ScoredCase> rank_cases(std::span<const CaseView> cases, const Situation& query, std::size_t k,
                                   const SimilarityMeasure& m, SequenceMode mode = SequenceMode::latest);

std::vector<CaseView> load_case_views(const Store& store);

std::vector<ScoredCase> retrieve(const Store& store, const Situation& query, std::size_t k,
                                 const SimilarityMeasure& m = default_measure(),
                                 SequenceMode mode = SequenceMode::latest);

}  // namespace semidx
