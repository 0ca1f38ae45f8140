#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "gammix/mixture.hpp"
#include "gammix/rng.hpp"
#include "gammix/shifted_gamma.hpp"
#include "gammix/significance.hpp"
#include "oracles.hpp"

using gammix::GammaMixture;
using gammix::Match;
using gammix::ShiftedGamma;
using gammix::SimilarityMatrix;

namespace {

GammaMixture reference_single() {
  return GammaMixture{ShiftedGamma(13.3, -0.28, 35.5)};
}

SimilarityMatrix make_matrix(std::size_t q, std::size_t d,
                             std::vector<double> entries) {
  SimilarityMatrix s;
  s.n_queries = q;
  s.n_candidates = d;
  s.entries = std::move(entries);
  return s;
}

// Greedy one-to-one assignment re-derived from the documented rule: sort
// all pairs by (p, candidate, query) and take the first free pairing.
std::vector<std::size_t> greedy_oracle(const std::vector<double>& p,
                                       std::size_t Q, std::size_t D) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t q = 0; q < Q; ++q)
    for (std::size_t d = 0; d < D; ++d) pairs.push_back({p[q * D + d], d, q});
  std::sort(pairs.begin(), pairs.end());
  std::vector<std::size_t> pick(Q, SIZE_MAX);
  std::vector<bool> used(D, false);
  std::size_t assigned = 0;
  for (const auto& [pv, d, q] : pairs) {
    if (assigned == Q) break;
    if (pick[q] != SIZE_MAX || used[d]) continue;
    pick[q] = d;
    used[d] = true;
    ++assigned;
  }
  return pick;
}

}  // namespace

TEST_CASE("p_value is the survival function, monotone in similarity") {
  const GammaMixture m = reference_single();
  CHECK(gammix::p_value(m, 0.5) ==
        doctest::Approx(8.72287598084153864676e-4).epsilon(1e-12));
  // Below the support everything is at least as large: p = 1.
  CHECK(gammix::p_value(m, -0.5) == 1.0);
  CHECK(gammix::p_value(m, -0.28) == 1.0);
  CHECK(gammix::p_value(m, 0.99) < 1e-8);

  double prev = 2.0;
  for (int j = 0; j <= 60; ++j) {
    const double x = -0.3 + j * (1.2 / 60.0);
    const double p = gammix::p_value(m, x);
    CHECK(p <= prev);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    prev = p;
  }
}

TEST_CASE("p_value agrees with a Monte Carlo tail frequency") {
  const GammaMixture m = reference_single();
  const std::size_t n = 10000000;
  const auto xs = m.sample(n, 101);
  std::size_t hits = 0;
  for (double x : xs)
    if (x > 0.5) ++hits;
  const double p = 8.72287598084153864676e-4;
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  CHECK(std::fabs(static_cast<double>(hits) / static_cast<double>(n) - p) <
        3.0 * se);
}

TEST_CASE("similarity matrix validation") {
  CHECK_NOTHROW(make_matrix(1, 2, {0.1, 0.2}).validate());
  CHECK_THROWS_AS(make_matrix(0, 2, {}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_matrix(1, 0, {}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_matrix(2, 2, {0.1, 0.2, 0.3}).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_matrix(1, 2, {0.1, std::nan("")}).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_matrix(1, 2, {0.1, 1.2}).validate(),
                  std::invalid_argument);
}

TEST_CASE("best_matches: single pair and per-query winners") {
  const GammaMixture m = reference_single();
  const auto single = gammix::best_matches(make_matrix(1, 1, {0.4}), {m}, false);
  REQUIRE(single.per_query.size() == 1);
  CHECK(single.per_query[0].query == 0);
  CHECK(single.per_query[0].candidate == 0);
  CHECK(single.per_query[0].similarity == 0.4);
  CHECK(single.per_query[0].p_value ==
        doctest::Approx(gammix::p_value(m, 0.4)).epsilon(1e-14));

  // Highest similarity wins under a shared null (sf is decreasing).
  const auto res = gammix::best_matches(
      make_matrix(2, 3, {0.1, 0.6, 0.3, 0.5, 0.2, 0.4}), {m, m}, false);
  CHECK(res.per_query[0].candidate == 1);
  CHECK(res.per_query[1].candidate == 0);

  // A column of -1 similarities (p = 1 everywhere) changes nothing.
  const auto padded = gammix::best_matches(
      make_matrix(2, 4, {0.1, 0.6, 0.3, -1.0, 0.5, 0.2, 0.4, -1.0}), {m, m},
      false);
  CHECK(padded.per_query[0].candidate == 1);
  CHECK(padded.per_query[1].candidate == 0);

  // The combined statistic is Fisher's method over the per-query p-values.
  const auto comb = gammix::combine_p_values(
      {res.per_query[0].p_value, res.per_query[1].p_value});
  CHECK(res.combined_stat == doctest::Approx(comb.stat).epsilon(1e-13));
  CHECK(res.combined_p == doctest::Approx(comb.combined_p).epsilon(1e-13));
}

TEST_CASE("best_matches: one-to-one assignment and tie-breaking") {
  const GammaMixture m = reference_single();
  // Both queries prefer candidate 1; the smaller p-value (query 1) takes it.
  const auto res = gammix::best_matches(
      make_matrix(2, 2, {0.3, 0.5, 0.2, 0.6}), {m, m}, true);
  CHECK(res.per_query[0].candidate == 0);
  CHECK(res.per_query[1].candidate == 1);

  // Fully tied matrix: ties resolve by candidate index, then query index.
  const auto tied = gammix::best_matches(
      make_matrix(2, 2, {0.5, 0.5, 0.5, 0.5}), {m, m}, true);
  CHECK(tied.per_query[0].candidate == 0);
  CHECK(tied.per_query[1].candidate == 1);

  CHECK_THROWS_AS(
      gammix::best_matches(make_matrix(2, 1, {0.5, 0.5}), {m, m}, true),
      std::invalid_argument);
  // One null per query is required.
  CHECK_THROWS_AS(
      gammix::best_matches(make_matrix(2, 2, {0.5, 0.5, 0.5, 0.5}), {m}, true),
      std::invalid_argument);
}

TEST_CASE("best_matches: one-to-one agrees with the sorted-pairs oracle") {
  const GammaMixture m = reference_single();
  gammix::Rng rng(201);
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t Q = 3, D = 10;
    std::vector<double> sims(Q * D);
    for (double& s : sims) s = rng.uniform(-0.2, 0.75);
    const auto res =
        gammix::best_matches(make_matrix(Q, D, sims), {m, m, m}, true);

    std::vector<double> ps(Q * D);
    for (std::size_t j = 0; j < sims.size(); ++j)
      ps[j] = gammix::p_value(m, sims[j]);
    const auto expect = greedy_oracle(ps, Q, D);
    for (std::size_t q = 0; q < Q; ++q) {
      CHECK(res.per_query[q].query == q);
      CHECK(res.per_query[q].candidate == expect[q]);
    }
  }
}

TEST_CASE("greedy one-to-one is usually the exhaustive optimum on small inputs") {
  // Not a contract: the greedy rule can differ from the global optimum.
  // This documents how close it lands on random instances.
  const GammaMixture m = reference_single();
  gammix::Rng rng(301);
  int optimal = 0, total = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t Q = 3, D = 6;
    std::vector<double> sims(Q * D);
    for (double& s : sims) s = rng.uniform(-0.2, 0.75);
    std::vector<double> ps(Q * D);
    for (std::size_t j = 0; j < sims.size(); ++j)
      ps[j] = gammix::p_value(m, sims[j]);

    const auto res =
        gammix::best_matches(make_matrix(Q, D, sims), {m, m, m}, true);
    const auto best = oracles::brute_force_assignment(ps, Q, D);
    double greedy_score = 0.0, best_score = 0.0;
    for (std::size_t q = 0; q < Q; ++q) {
      greedy_score += std::log(ps[q * D + res.per_query[q].candidate]);
      best_score += std::log(ps[q * D + best[q]]);
    }
    // The exhaustive optimum is a true lower bound on the greedy score.
    CHECK(greedy_score >= best_score - 1e-12);
    ++total;
    if (greedy_score <= best_score + 1e-12) ++optimal;
  }
  // Greedy found the exhaustive optimum in the large majority of instances.
  CHECK(optimal >= total * 3 / 4);
}

TEST_CASE("combine_p_values: identities, frozen values, and guards") {
  // A single p-value combines to itself (chi-square with 2 dof).
  const auto one = gammix::combine_p_values({0.05});
  CHECK(one.stat == doctest::Approx(-2.0 * std::log(0.05)).epsilon(1e-14));
  CHECK(one.combined_p == doctest::Approx(0.05).epsilon(1e-12));
  CHECK_FALSE(one.clamped);

  const auto certain = gammix::combine_p_values({1.0, 1.0, 1.0});
  CHECK(certain.stat == doctest::Approx(0.0));
  CHECK(certain.combined_p == doctest::Approx(1.0).epsilon(1e-14));

  const auto pair = gammix::combine_p_values({0.1, 0.1});
  CHECK(pair.stat == doctest::Approx(9.21034037197618273607).epsilon(1e-14));
  CHECK(pair.combined_p ==
        doctest::Approx(0.0560517018598809136804).epsilon(1e-13));

  const auto clamped = gammix::combine_p_values({0.0, 0.5});
  CHECK(clamped.clamped);
  CHECK(std::isfinite(clamped.stat));
  CHECK(clamped.combined_p >= 0.0);

  // Order independence and monotonicity.
  const auto fwd = gammix::combine_p_values({0.3, 0.01, 0.7});
  const auto rev = gammix::combine_p_values({0.7, 0.01, 0.3});
  CHECK(fwd.stat == doctest::Approx(rev.stat).epsilon(1e-13));
  CHECK(fwd.combined_p == doctest::Approx(rev.combined_p).epsilon(1e-13));
  const auto stronger = gammix::combine_p_values({0.3, 0.001, 0.7});
  CHECK(stronger.combined_p < fwd.combined_p);

  CHECK_THROWS_AS(gammix::combine_p_values({}), std::invalid_argument);
  CHECK_THROWS_AS(gammix::combine_p_values({-0.1}), std::invalid_argument);
  CHECK_THROWS_AS(gammix::combine_p_values({1.5}), std::invalid_argument);
  CHECK_THROWS_AS(gammix::combine_p_values({std::nan("")}),
                  std::invalid_argument);
}

TEST_CASE("p-values of model draws are uniform (calibration)") {
  const GammaMixture m = reference_single();
  const std::size_t n = 100000;
  const auto xs = m.sample(n, 211);
  std::vector<double> ps(n);
  for (std::size_t j = 0; j < n; ++j) ps[j] = gammix::p_value(m, xs[j]);
  // Under the null the p-values are Uniform(0,1).
  const double d =
      oracles::ks_statistic(ps, [](double u) { return std::clamp(u, 0.0, 1.0); });
  CHECK(d < oracles::ks_crit_1pct(n));
}
