#include "gammix/significance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gammix/special_functions.hpp"

namespace gammix {

void SimilarityMatrix::validate() const {
  if (n_queries < 1 || n_candidates < 1)
    throw std::invalid_argument("SimilarityMatrix: need >= 1 row and column");
  if (entries.size() != n_queries * n_candidates)
    throw std::invalid_argument("SimilarityMatrix: entry count mismatch");
  for (std::size_t j = 0; j < entries.size(); ++j) {
    const double v = entries[j];
    if (!std::isfinite(v) || v < -1.0 || v > 1.0)
      throw std::invalid_argument("SimilarityMatrix: entry " +
                                  std::to_string(j) + " outside [-1,1]");
  }
}

double p_value(const GammaMixture& m, double x) { return m.sf(x); }

MatchResult best_matches(const SimilarityMatrix& S,
                         const std::vector<GammaMixture>& nulls,
                         bool one_to_one) {
  S.validate();
  const std::size_t Q = S.n_queries;
  const std::size_t D = S.n_candidates;
  if (nulls.size() != Q)
    throw std::invalid_argument("best_matches: need one null mixture per query");
  if (one_to_one && Q > D)
    throw std::invalid_argument(
        "best_matches: one-to-one assignment impossible with " +
        std::to_string(Q) + " queries and " + std::to_string(D) +
        " candidates");

  MatchResult result;
  result.per_query.resize(Q);

  if (!one_to_one) {
    for (std::size_t q = 0; q < Q; ++q) {
      Match best{q, 0, S.at(q, 0), p_value(nulls[q], S.at(q, 0))};
      for (std::size_t d = 1; d < D; ++d) {
        const double p = p_value(nulls[q], S.at(q, d));
        if (p < best.p_value) best = Match{q, d, S.at(q, d), p};
      }
      result.per_query[q] = best;
    }
  } else {
    std::vector<Match> pairs;
    pairs.reserve(Q * D);
    for (std::size_t q = 0; q < Q; ++q)
      for (std::size_t d = 0; d < D; ++d)
        pairs.push_back({q, d, S.at(q, d), p_value(nulls[q], S.at(q, d))});
    std::sort(pairs.begin(), pairs.end(), [](const Match& a, const Match& b) {
      if (a.p_value != b.p_value) return a.p_value < b.p_value;
      if (a.candidate != b.candidate) return a.candidate < b.candidate;
      return a.query < b.query;
    });
    std::vector<bool> query_done(Q, false), candidate_used(D, false);
    std::size_t assigned = 0;
    for (const Match& pair : pairs) {
      if (assigned == Q) break;
      if (query_done[pair.query] || candidate_used[pair.candidate]) continue;
      result.per_query[pair.query] = pair;
      query_done[pair.query] = true;
      candidate_used[pair.candidate] = true;
      ++assigned;
    }
  }

  std::vector<double> ps(Q);
  for (std::size_t q = 0; q < Q; ++q) ps[q] = result.per_query[q].p_value;
  const CombineResult combined = combine_p_values(ps);
  result.combined_stat = combined.stat;
  result.combined_p = combined.combined_p;
  result.any_clamped = combined.clamped;
  return result;
}

CombineResult combine_p_values(const std::vector<double>& ps) {
  if (ps.empty())
    throw std::invalid_argument("combine_p_values: need at least one p-value");
  CombineResult out;
  double stat = 0.0;
  for (std::size_t j = 0; j < ps.size(); ++j) {
    double p = ps[j];
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
      throw std::invalid_argument("combine_p_values: p-value " +
                                  std::to_string(j) + " outside [0,1]");
    if (p == 0.0) {
      p = std::numeric_limits<double>::denorm_min();
      out.clamped = true;
    }
    stat += -2.0 * std::log(p);
  }
  out.stat = stat;
  // Chi-square with 2k degrees of freedom: sf(x) = Q(k, x/2).
  out.combined_p =
      sf::reg_upper_inc_gamma(static_cast<double>(ps.size()), stat / 2.0);
  return out;
}

}  // namespace gammix
