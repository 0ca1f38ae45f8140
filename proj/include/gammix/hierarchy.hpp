#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gammix {

// Configuration for the hierarchical-clustering similarity simulation: a
// degree_k-ary tree of depth_m rounds where each child is ratio_eta times its
// parent plus fresh uniform(-1,1)^dim_n noise.
struct HierarchyConfig {
  // Which vector the final generation is compared against.
  enum class Query { kFirstLeaf, kRoot };

  int depth_m = 1;
  double ratio_eta = 0.95;
  int degree_k = 2;
  int dim_n = 384;
  std::uint64_t seed = 1;
  // Upper bound on the final generation size degree_k^depth_m.
  std::uint64_t sample_cap = std::uint64_t{1} << 21;
  Query query = Query::kFirstLeaf;
  // Omit the query's own similarity (exactly 1 for the first-leaf query).
  bool drop_self = false;

  // Throws std::invalid_argument on malformed fields and SizeCapError when
  // degree_k^depth_m exceeds sample_cap.
  void validate() const;

  // degree_k^depth_m, guaranteed <= sample_cap after validate().
  std::uint64_t leaf_count() const;
};

// Cosine similarities of every final-generation vector against the query,
// labeled with the generation index of the last common ancestor shared with
// the query (0 = root, depth_m = the query itself).
struct LabeledSimilarities {
  std::vector<double> sims;
  std::vector<int> levels;
  int depth_m = 0;
};

// Runs the simulation. Deterministic for a fixed config: every tree node
// draws from its own RNG stream keyed by (seed, generation, index), so the
// walk needs only one root-to-leaf path in memory at a time.
LabeledSimilarities simulate(const HierarchyConfig& cfg);

// Bins sims over [-1,1] into n_bins equal-width bins, split by level.
// Result has depth_m+1 rows (level 0..depth_m) of n_bins counts; the grand
// total equals ls.sims.size().
std::vector<std::vector<std::size_t>> level_histogram(
    const LabeledSimilarities& ls, int n_bins);

}  // namespace gammix
