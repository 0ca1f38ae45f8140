#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gammix/em.hpp"
#include "gammix/errors.hpp"
#include "gammix/hierarchy.hpp"
#include "gammix/io.hpp"
#include "gammix/mixture.hpp"
#include "gammix/significance.hpp"

namespace {

using namespace gammix;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void print_fit_summary(const FitReport& report) {
  const GammaMixture& m = report.model;
  std::cout << "state tau alpha c lambda\n";
  for (std::size_t i = 0; i < m.n_states(); ++i) {
    const ShiftedGamma& g = m.component(i);
    std::cout << (i + 1) << " " << fmt17(m.weight(i)) << " "
              << fmt17(g.alpha()) << " " << fmt17(g.shift()) << " "
              << fmt17(g.rate()) << "\n";
  }
  std::cout << "log_likelihood " << fmt17(report.log_likelihood) << "\n";
  std::cout << "mass_outside " << fmt17(report.mass_outside) << "\n";
  std::cout << "iterations " << report.iterations_run << "\n";
  std::cout << "converged " << (report.converged ? 1 : 0) << "\n";
  std::cout << "n_samples " << report.n_samples << "\n";
}

int cmd_fit(const std::string& scores_path, FitConfig cfg, int bins,
            const std::string& out_path, const std::string& density_path) {
  const io::ScoreData scores = io::read_scores(scores_path);
  ScoreSample data{scores.values, std::nullopt};
  const FitReport report = fit(data, cfg);
  print_fit_summary(report);
  if (!out_path.empty()) io::save_model(out_path, report);
  if (!density_path.empty())
    io::write_density_csv(density_path,
                          io::density_table(report.model, data.values, bins));
  return 0;
}

int cmd_sample(const std::string& model_path, std::size_t n,
               std::uint64_t seed, const std::string& out_path) {
  const FitReport report = io::load_model(model_path);
  const std::vector<double> draws = report.model.sample(n, seed);
  io::write_scores(out_path, draws, {},
                   "drawn from " + model_path + " n=" + std::to_string(n) +
                       " seed=" + std::to_string(seed));
  std::cout << "wrote " << n << " samples to " << out_path << "\n";
  return 0;
}

int cmd_simulate(const HierarchyConfig& cfg, const std::string& out_path) {
  const LabeledSimilarities ls = simulate(cfg);
  io::write_scores(
      out_path, ls.sims, ls.levels,
      "hierarchy similarities: depth=" + std::to_string(cfg.depth_m) +
          " eta=" + fmt17(cfg.ratio_eta) +
          " degree=" + std::to_string(cfg.degree_k) +
          " dim=" + std::to_string(cfg.dim_n) +
          " seed=" + std::to_string(cfg.seed) + "\ncolumns: similarity level");
  std::cout << "rows " << ls.sims.size() << "\n";
  return 0;
}

int cmd_pvalue(const std::string& model_path, const std::vector<double>& xs,
               const std::string& scores_path) {
  const FitReport report = io::load_model(model_path);
  std::vector<double> values = xs;
  if (!scores_path.empty()) {
    const io::ScoreData scores = io::read_scores(scores_path);
    values.insert(values.end(), scores.values.begin(), scores.values.end());
  }
  std::cout << "x p_value\n";
  for (double x : values)
    std::cout << fmt17(x) << " " << fmt17(p_value(report.model, x)) << "\n";
  return 0;
}

int cmd_match(const std::string& matrix_path,
              const std::vector<std::string>& null_paths, bool one_to_one) {
  const SimilarityMatrix S = io::read_sim_matrix(matrix_path);
  std::vector<GammaMixture> nulls;
  for (const std::string& path : null_paths)
    nulls.push_back(io::load_model(path).model);
  if (nulls.size() == 1 && S.n_queries > 1) {
    // One model broadcasts to every query.
    nulls.resize(S.n_queries, nulls.front());
  }
  if (nulls.size() != S.n_queries)
    throw std::invalid_argument(
        "match: got " + std::to_string(null_paths.size()) +
        " null models for " + std::to_string(S.n_queries) + " queries");
  const MatchResult result = best_matches(S, nulls, one_to_one);
  std::cout << "query candidate similarity p_value\n";
  for (const Match& match : result.per_query)
    std::cout << match.query << " " << match.candidate << " "
              << fmt17(match.similarity) << " " << fmt17(match.p_value)
              << "\n";
  std::cout << "combined_stat " << fmt17(result.combined_stat) << "\n";
  std::cout << "combined_p " << fmt17(result.combined_p) << "\n";
  std::cout << "clamped " << (result.any_clamped ? 1 : 0) << "\n";
  return 0;
}

int cmd_cossim(const std::string& query_path, const std::string& docs_path,
               const std::string& out_path) {
  const auto queries = io::read_embeddings(query_path);
  const auto docs = io::read_embeddings(docs_path);
  SimilarityMatrix S;
  S.n_queries = queries.size();
  S.n_candidates = docs.size();
  S.entries.reserve(queries.size() * docs.size());
  for (const std::vector<double>& q : queries) {
    const std::vector<double> sims = io::cosine_similarities(q, docs);
    S.entries.insert(S.entries.end(), sims.begin(), sims.end());
  }
  for (std::size_t q = 0; q < S.n_queries; ++q) {
    for (std::size_t d = 0; d < S.n_candidates; ++d) {
      if (d > 0) std::cout << ",";
      std::cout << fmt17(S.at(q, d));
    }
    std::cout << "\n";
  }
  if (!out_path.empty()) io::write_sim_matrix(out_path, S);
  return 0;
}

int cmd_bench(std::size_t n, const std::vector<int>& states_list, int repeats,
              std::uint64_t seed) {
  // Synthetic two-component data resembling empirical similarity scores.
  const GammaMixture source(
      {ShiftedGamma(67.1, -0.20, 109.0), ShiftedGamma(19.2, -0.25, 45.8)},
      {0.10, 0.90});
  ScoreSample data{source.sample(n, seed), std::nullopt};

  const auto median_fit_ms = [&](const FitConfig& cfg, double* ll) {
    std::vector<double> times;
    for (int r = 0; r < repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      const FitReport report = fit(data, cfg);
      const auto t1 = std::chrono::steady_clock::now();
      times.push_back(
          std::chrono::duration<double, std::milli>(t1 - t0).count());
      *ll = report.log_likelihood;
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
  };

  std::cout << "states warm_ms cold_ms speedup ll_rel_delta\n";
  for (int s : states_list) {
    FitConfig cfg;
    cfg.n_states = s;
    cfg.seed = seed;
    double ll_warm = 0.0, ll_cold = 0.0;
    cfg.warm_start = true;
    const double warm_ms = median_fit_ms(cfg, &ll_warm);
    cfg.warm_start = false;
    const double cold_ms = median_fit_ms(cfg, &ll_cold);
    const double speedup = warm_ms > 0.0 ? cold_ms / warm_ms : 0.0;
    const double rel_delta =
        std::fabs(ll_warm - ll_cold) / std::max(1.0, std::fabs(ll_cold));
    char row[160];
    std::snprintf(row, sizeof(row), "%d %.3f %.3f %.3f %.3e\n", s, warm_ms,
                  cold_ms, speedup, rel_delta);
    std::cout << row;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shifted-gamma mixture fitting for similarity scores"};
  app.require_subcommand(1);

  // fit
  std::string fit_scores, fit_out, fit_density;
  FitConfig fit_cfg;
  int fit_bins = 100;
  bool fit_no_warm = false;
  CLI::App* fit_cmd =
      app.add_subcommand("fit", "Fit a shifted-gamma mixture to a score file");
  fit_cmd->add_option("scores", fit_scores, "Score file, one value per line")
      ->required();
  fit_cmd->add_option("--states", fit_cfg.n_states, "Number of components");
  fit_cmd->add_option("--max-iters", fit_cfg.max_iters, "Iteration budget");
  fit_cmd->add_option("--tol", fit_cfg.rel_ll_tol,
                      "Relative log-likelihood convergence tolerance");
  fit_cmd->add_flag("--no-warm-start", fit_no_warm,
                    "Run every iteration on the full data");
  fit_cmd->add_option("--seed", fit_cfg.seed, "Initialization seed");
  fit_cmd->add_option("--bins", fit_bins, "Histogram bins for --density-out");
  fit_cmd->add_option("--out", fit_out, "Write the fitted model (JSON)");
  fit_cmd->add_option("--density-out", fit_density,
                      "Write a density CSV (empirical vs fitted)");

  // sample
  std::string sample_model, sample_out;
  std::size_t sample_n = 0;
  std::uint64_t sample_seed = 1;
  CLI::App* sample_cmd =
      app.add_subcommand("sample", "Draw samples from a fitted model");
  sample_cmd->add_option("model", sample_model, "Model file (JSON)")
      ->required();
  sample_cmd->add_option("--n", sample_n, "Number of draws")->required();
  sample_cmd->add_option("--seed", sample_seed, "RNG seed");
  sample_cmd->add_option("--out", sample_out, "Output score file")->required();

  // simulate
  HierarchyConfig sim_cfg;
  std::string sim_out, sim_query = "first-leaf";
  CLI::App* sim_cmd = app.add_subcommand(
      "simulate", "Generate hierarchical-clustering similarity scores");
  sim_cmd->add_option("--depth", sim_cfg.depth_m, "Tree depth (rounds)")
      ->required();
  sim_cmd->add_option("--eta", sim_cfg.ratio_eta, "Parent-child correlation")
      ->required();
  sim_cmd->add_option("--degree", sim_cfg.degree_k, "Children per node")
      ->required();
  sim_cmd->add_option("--dim", sim_cfg.dim_n, "Vector dimension");
  sim_cmd->add_option("--seed", sim_cfg.seed, "RNG seed");
  sim_cmd
      ->add_option("--query", sim_query,
                   "Reference vector: first-leaf or root")
      ->check(CLI::IsMember({"first-leaf", "root"}));
  sim_cmd->add_flag("--drop-self", sim_cfg.drop_self,
                    "Omit the query's self-similarity of 1.0");
  sim_cmd->add_option("--cap", sim_cfg.sample_cap,
                      "Refuse to generate more than this many vectors");
  sim_cmd->add_option("--out", sim_out, "Output score file (with level column)")
      ->required();

  // pvalue
  std::string pv_model, pv_scores;
  std::vector<double> pv_xs;
  CLI::App* pv_cmd = app.add_subcommand(
      "pvalue", "Right-tail p-values of similarities under a fitted model");
  pv_cmd->add_option("model", pv_model, "Model file (JSON)")->required();
  pv_cmd->add_option("--x", pv_xs, "Similarity value(s)");
  pv_cmd->add_option("--scores", pv_scores, "Score file to evaluate");

  // match
  std::string match_matrix;
  std::vector<std::string> match_nulls;
  bool match_one_to_one = false;
  CLI::App* match_cmd = app.add_subcommand(
      "match", "Most significant query-candidate matches from a sim matrix");
  match_cmd->add_option("matrix", match_matrix, "Similarity matrix CSV")
      ->required();
  match_cmd
      ->add_option("--nulls", match_nulls,
                   "Null model file per query (one file broadcasts)")
      ->required();
  match_cmd->add_flag("--one-to-one", match_one_to_one,
                      "Assign each candidate to at most one query");

  // cossim
  std::string cs_query, cs_docs, cs_out;
  CLI::App* cs_cmd = app.add_subcommand(
      "cossim", "Cosine similarities between embedding files (CSV matrix out)");
  cs_cmd->add_option("queries", cs_query, "Query embeddings, one per line")
      ->required();
  cs_cmd->add_option("docs", cs_docs, "Document embeddings, one per line")
      ->required();
  cs_cmd->add_option("--out", cs_out, "Also write the matrix CSV here");

  // bench
  std::size_t bench_n = 100000;
  std::vector<int> bench_states{1, 2, 4};
  int bench_repeats = 3;
  std::uint64_t bench_seed = 1;
  CLI::App* bench_cmd = app.add_subcommand(
      "bench", "Time warm vs cold fits on synthetic data");
  bench_cmd->add_option("--n", bench_n, "Synthetic sample size");
  bench_cmd->add_option("--states-list", bench_states, "Component counts");
  bench_cmd->add_option("--repeats", bench_repeats, "Repeats per timing");
  bench_cmd->add_option("--seed", bench_seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (fit_cmd->parsed()) {
      fit_cfg.warm_start = !fit_no_warm;
      return cmd_fit(fit_scores, fit_cfg, fit_bins, fit_out, fit_density);
    }
    if (sample_cmd->parsed())
      return cmd_sample(sample_model, sample_n, sample_seed, sample_out);
    if (sim_cmd->parsed()) {
      sim_cfg.query = sim_query == "root" ? HierarchyConfig::Query::kRoot
                                          : HierarchyConfig::Query::kFirstLeaf;
      return cmd_simulate(sim_cfg, sim_out);
    }
    if (pv_cmd->parsed()) {
      if (pv_xs.empty() && pv_scores.empty())
        throw std::invalid_argument("pvalue: need --x or --scores");
      return cmd_pvalue(pv_model, pv_xs, pv_scores);
    }
    if (match_cmd->parsed())
      return cmd_match(match_matrix, match_nulls, match_one_to_one);
    if (cs_cmd->parsed()) return cmd_cossim(cs_query, cs_docs, cs_out);
    if (bench_cmd->parsed())
      return cmd_bench(bench_n, bench_states, bench_repeats, bench_seed);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const TooFewSamplesError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const SizeCapError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const FitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
