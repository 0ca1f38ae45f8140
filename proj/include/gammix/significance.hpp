#pragma once

#include <cstddef>
#include <vector>

#include "gammix/mixture.hpp"

namespace gammix {

// Row-major Q x D matrix of cosine similarities: one row per query, one
// column per candidate.
struct SimilarityMatrix {
  std::size_t n_queries = 0;
  std::size_t n_candidates = 0;
  std::vector<double> entries;

  double at(std::size_t q, std::size_t d) const {
    return entries[q * n_candidates + d];
  }
  double& at(std::size_t q, std::size_t d) {
    return entries[q * n_candidates + d];
  }
  // Throws std::invalid_argument on shape mismatch or entries outside [-1,1].
  void validate() const;
};

// Right-tail significance of one match under a query's null mixture.
struct Match {
  std::size_t query = 0;
  std::size_t candidate = 0;
  double similarity = 0.0;
  double p_value = 1.0;
};

struct MatchResult {
  std::vector<Match> per_query;  // ordered by query index
  double combined_stat = 0.0;
  double combined_p = 1.0;
  bool any_clamped = false;  // a zero p-value was clamped before combining
};

struct CombineResult {
  double stat = 0.0;
  double combined_p = 1.0;
  bool clamped = false;
};

// Right-tail p-value of similarity x under null m: the survival function,
// since larger similarity means a more surprising match.
double p_value(const GammaMixture& m, double x);

// Per query, the candidate with the smallest p-value under that query's
// null (nulls.size() must equal S.n_queries). With one_to_one, pairs are
// assigned greedily in ascending p-value order, each candidate used at most
// once; ties prefer the lower candidate index, then the lower query index.
// one_to_one with more queries than candidates throws std::invalid_argument.
// Per-query p-values are Fisher-combined into combined_stat / combined_p.
MatchResult best_matches(const SimilarityMatrix& S,
                         const std::vector<GammaMixture>& nulls,
                         bool one_to_one);

// Fisher's method: stat = -2 sum(ln p_i), combined_p the chi-square(2k)
// right tail of stat. Zero p-values are clamped to the smallest positive
// double and flagged; p outside [0,1] or an empty list throws
// std::invalid_argument.
CombineResult combine_p_values(const std::vector<double>& ps);

}  // namespace gammix
