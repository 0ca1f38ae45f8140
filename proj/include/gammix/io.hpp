#pragma once

#include <span>
#include <string>
#include <vector>

#include "gammix/em.hpp"
#include "gammix/mixture.hpp"
#include "gammix/significance.hpp"

namespace gammix::io {

// One score per line, '#' comment lines, optional integer level column
// (either every data line has it or none does).
struct ScoreData {
  std::vector<double> values;
  std::vector<int> levels;  // empty when the file has no level column

  bool has_levels() const { return !levels.empty(); }
};

ScoreData read_scores(const std::string& path);

// Values at 17 significant digits so parse(write(x)) == x. Each line of
// `header` is written as a leading '#' comment; pass levels of equal length
// to emit the two-column form.
void write_scores(const std::string& path, std::span<const double> values,
                  std::span<const int> levels = {},
                  const std::string& header = "");

// Model files are JSON with a fixed schema; unknown keys anywhere in the
// document are rejected. Weights may be off by up to 1e-9 on load (they are
// renormalized); states must already be in canonical order.
void save_model(const std::string& path, const FitReport& report);
FitReport load_model(const std::string& path);

// One vector per line as comma-separated floats, '#' comments allowed,
// uniform dimension across lines.
std::vector<std::vector<double>> read_embeddings(const std::string& path);

// Cosine similarity of the query against every doc, clamped to [-1,1].
// Dimension mismatches or zero-norm vectors throw std::invalid_argument
// naming the offending row.
std::vector<double> cosine_similarities(
    const std::vector<double>& query,
    const std::vector<std::vector<double>>& docs);

// Q rows of D comma-separated similarities.
SimilarityMatrix read_sim_matrix(const std::string& path);
void write_sim_matrix(const std::string& path, const SimilarityMatrix& S);

// Plot-ready density export: histogram of the data next to the fitted
// density and its weighted per-state terms, evaluated at bin centers over
// [min(x) - 0.02, max(x) + 0.02].
struct DensityTable {
  std::vector<double> x;
  std::vector<double> empirical;
  std::vector<double> fitted;
  std::vector<std::vector<double>> per_state;  // [state][bin]
};

DensityTable density_table(const GammaMixture& m, std::span<const double> xs,
                           int n_bins);
void write_density_csv(const std::string& path, const DensityTable& table);

}  // namespace gammix::io
