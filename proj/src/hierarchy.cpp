#include "gammix/hierarchy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gammix/errors.hpp"
#include "gammix/rng.hpp"

namespace gammix {

namespace {

// Draws the vector for tree node (generation, index). Generation 0 is the
// root, uniform on (-1,1)^n; deeper nodes are eta * parent + fresh noise.
void fill_node(std::vector<double>& out, const std::vector<double>* parent,
               double eta, std::uint64_t generation, std::uint64_t index,
               std::uint64_t seed) {
  Rng rng = Rng::stream(seed, generation, index);
  if (parent == nullptr) {
    for (double& v : out) v = 2.0 * rng.uniform01() - 1.0;
  } else {
    for (std::size_t d = 0; d < out.size(); ++d)
      out[d] = eta * (*parent)[d] + (2.0 * rng.uniform01() - 1.0);
  }
}

std::vector<double> normalized(const std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw std::domain_error("simulate: cannot normalize degenerate vector");
  std::vector<double> unit(v.size());
  for (std::size_t d = 0; d < v.size(); ++d) unit[d] = v[d] / norm;
  return unit;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) acc += a[d] * b[d];
  return acc;
}

}  // namespace

void HierarchyConfig::validate() const {
  if (depth_m < 1) throw std::invalid_argument("HierarchyConfig: depth_m >= 1");
  if (degree_k < 1)
    throw std::invalid_argument("HierarchyConfig: degree_k >= 1");
  if (dim_n < 2) throw std::invalid_argument("HierarchyConfig: dim_n >= 2");
  if (!std::isfinite(ratio_eta))
    throw std::invalid_argument("HierarchyConfig: ratio_eta must be finite");
  if (sample_cap < 1)
    throw std::invalid_argument("HierarchyConfig: sample_cap >= 1");
  std::uint64_t count = 1;
  for (int g = 0; g < depth_m; ++g) {
    if (count > sample_cap / static_cast<std::uint64_t>(degree_k))
      throw SizeCapError("HierarchyConfig: " + std::to_string(degree_k) + "^" +
                         std::to_string(depth_m) + " final vectors exceed cap " +
                         std::to_string(sample_cap));
    count *= static_cast<std::uint64_t>(degree_k);
  }
}

std::uint64_t HierarchyConfig::leaf_count() const {
  std::uint64_t count = 1;
  for (int g = 0; g < depth_m; ++g)
    count *= static_cast<std::uint64_t>(degree_k);
  return count;
}

LabeledSimilarities simulate(const HierarchyConfig& cfg) {
  cfg.validate();
  const int m = cfg.depth_m;
  const std::uint64_t k = static_cast<std::uint64_t>(cfg.degree_k);
  const std::size_t n = static_cast<std::size_t>(cfg.dim_n);
  const std::uint64_t leaves = cfg.leaf_count();

  // One root-to-leaf path of vectors; path[g] is the current node at
  // generation g, digits[g] its child slot under path[g], and index[g] its
  // breadth-first index within generation g.
  std::vector<std::vector<double>> path(static_cast<std::size_t>(m) + 1,
                                        std::vector<double>(n));
  std::vector<std::uint64_t> digits(static_cast<std::size_t>(m), 0);
  std::vector<std::uint64_t> index(static_cast<std::size_t>(m) + 1, 0);

  fill_node(path[0], nullptr, cfg.ratio_eta, 0, 0, cfg.seed);
  for (int g = 1; g <= m; ++g)
    fill_node(path[g], &path[g - 1], cfg.ratio_eta,
              static_cast<std::uint64_t>(g), 0, cfg.seed);

  const std::vector<double> query =
      normalized(cfg.query == HierarchyConfig::Query::kRoot ? path[0]
                                                            : path[m]);

  LabeledSimilarities out;
  out.depth_m = m;
  out.sims.reserve(leaves);
  out.levels.reserve(leaves);

  for (std::uint64_t leaf = 0;; ++leaf) {
    const bool is_first = leaf == 0;
    if (!(cfg.drop_self && is_first &&
          cfg.query == HierarchyConfig::Query::kFirstLeaf)) {
      out.sims.push_back(dot(query, normalized(path[m])));
      int level = 0;
      if (cfg.query == HierarchyConfig::Query::kFirstLeaf) {
        level = m;  // shared path length with the all-zeros leaf
        for (int g = 0; g < m; ++g) {
          if (digits[g] != 0) {
            level = g;
            break;
          }
        }
      }
      out.levels.push_back(level);
    }
    if (leaf + 1 == leaves) break;

    // Advance to the next leaf in leftmost-first order and redraw the
    // subpath below the digit that changed.
    int g = m - 1;
    while (digits[g] + 1 == k) {
      digits[g] = 0;
      --g;
    }
    ++digits[g];
    for (int h = g; h < m; ++h) {
      index[h + 1] = index[h] * k + digits[h];
      fill_node(path[h + 1], &path[h], cfg.ratio_eta,
                static_cast<std::uint64_t>(h + 1), index[h + 1], cfg.seed);
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> level_histogram(
    const LabeledSimilarities& ls, int n_bins) {
  if (n_bins < 1) throw std::invalid_argument("level_histogram: n_bins >= 1");
  if (ls.sims.size() != ls.levels.size())
    throw std::invalid_argument("level_histogram: sims/levels length mismatch");
  std::vector<std::vector<std::size_t>> counts(
      static_cast<std::size_t>(ls.depth_m) + 1,
      std::vector<std::size_t>(static_cast<std::size_t>(n_bins), 0));
  for (std::size_t t = 0; t < ls.sims.size(); ++t) {
    const int level = ls.levels[t];
    if (level < 0 || level > ls.depth_m)
      throw std::invalid_argument("level_histogram: level out of range");
    // Map [-1,1] onto [0, n_bins); the right edge lands in the last bin.
    double pos = (ls.sims[t] + 1.0) / 2.0 * n_bins;
    int bin = static_cast<int>(std::floor(pos));
    bin = std::max(0, std::min(n_bins - 1, bin));
    ++counts[static_cast<std::size_t>(level)][static_cast<std::size_t>(bin)];
  }
  return counts;
}

}  // namespace gammix
