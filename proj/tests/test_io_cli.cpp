#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "gammix/em.hpp"
#include "gammix/errors.hpp"
#include "gammix/io.hpp"
#include "gammix/mixture.hpp"
#include "gammix/shifted_gamma.hpp"
#include "gammix/significance.hpp"
#include "oracles.hpp"

using gammix::FitConfig;
using gammix::FitReport;
using gammix::GammaMixture;
using gammix::ParseError;
using gammix::ShiftedGamma;
namespace io = gammix::io;
using json = nlohmann::json;

namespace {

std::string tmp_path(const std::string& name) {
  return std::string(GAMMIX_TEST_TMPDIR) + "/" + name;
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << text;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args, const std::string& tag) {
  const std::string out_file = tmp_path(tag + ".stdout");
  const std::string err_file = tmp_path(tag + ".stderr");
  const std::string cmd = std::string(GAMMIX_CLI_PATH) + " " + args + " > " +
                          out_file + " 2> " + err_file;
  const int status = std::system(cmd.c_str());
  CliResult res;
  if (status != -1 && WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
  res.out = slurp(out_file);
  res.err = slurp(err_file);
  return res;
}

// A quick single-state fit used as model-file material.
FitReport small_fit(int n_states = 1) {
  const GammaMixture source({ShiftedGamma(67.1, -0.20, 109.0),
                             ShiftedGamma(19.2, -0.25, 45.8)},
                            {0.10, 0.90});
  gammix::ScoreSample data{source.sample(3000, 303), {}};
  FitConfig cfg;
  cfg.n_states = n_states;
  cfg.max_iters = 60;
  return gammix::fit(data, cfg);
}

json load_json(const std::string& path) { return json::parse(slurp(path)); }

void expect_load_fails(const json& doc, const std::string& tag) {
  const std::string path = tmp_path("tampered_" + tag + ".json");
  spit(path, doc.dump(2));
  CHECK_THROWS_AS(io::load_model(path), ParseError);
}

}  // namespace

TEST_CASE("score files round-trip exactly, including extreme values") {
  const std::vector<double> values{0.1,
                                   -1.0,
                                   1.0,
                                   1.0 / 3.0,
                                   0.09464788732394366,
                                   std::numeric_limits<double>::denorm_min(),
                                   1e-300,
                                   -9.87654321098765432e-7,
                                   0.0};
  const std::string path = tmp_path("roundtrip_scores.txt");
  io::write_scores(path, values, {}, "synthetic values\nsecond header line");
  const io::ScoreData back = io::read_scores(path);
  REQUIRE(back.values.size() == values.size());
  for (std::size_t j = 0; j < values.size(); ++j)
    CHECK(back.values[j] == values[j]);
  CHECK_FALSE(back.has_levels());

  // Header lines come back as comments, invisible to the parser.
  const std::string text = slurp(path);
  CHECK(text.find("# synthetic values") != std::string::npos);
  CHECK(text.find("# second header line") != std::string::npos);
}

TEST_CASE("score files carry an optional level column") {
  const std::vector<double> values{0.25, 0.5, 0.75};
  const std::vector<int> levels{0, 3, 20};
  const std::string path = tmp_path("leveled_scores.txt");
  io::write_scores(path, values, levels);
  const io::ScoreData back = io::read_scores(path);
  REQUIRE(back.has_levels());
  CHECK(back.values == values);
  CHECK(back.levels == levels);
}

TEST_CASE("score parser reports the offending line") {
  const std::string path = tmp_path("bad_scores.txt");
  spit(path, "# comment\n0.5\n\n0.25\nnot_a_number\n");
  try {
    io::read_scores(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":5") != std::string::npos);
  }

  spit(path, "0.5 1\n0.25\n");
  CHECK_THROWS_AS(io::read_scores(path), ParseError);  // level column lost
  spit(path, "0.5\n0.25 2\n");
  CHECK_THROWS_AS(io::read_scores(path), ParseError);  // level column gained
  spit(path, "0.5 1 9\n");
  CHECK_THROWS_AS(io::read_scores(path), ParseError);  // too many columns
  spit(path, "0.5 1.75\n");
  CHECK_THROWS_AS(io::read_scores(path), ParseError);  // fractional level
  CHECK_THROWS_AS(io::read_scores(tmp_path("no_such_file.txt")), ParseError);
}

TEST_CASE("model files round-trip every reported field") {
  const FitReport report = small_fit();
  const std::string path = tmp_path("model_roundtrip.json");
  io::save_model(path, report);
  const FitReport back = io::load_model(path);

  REQUIRE(back.model.n_states() == report.model.n_states());
  for (std::size_t i = 0; i < report.model.n_states(); ++i) {
    CHECK(back.model.weight(i) == report.model.weight(i));
    CHECK(back.model.component(i).alpha() == report.model.component(i).alpha());
    CHECK(back.model.component(i).shift() == report.model.component(i).shift());
    CHECK(back.model.component(i).rate() == report.model.component(i).rate());
  }
  CHECK(back.log_likelihood == report.log_likelihood);
  CHECK(back.n_samples == report.n_samples);
  CHECK(back.mass_outside == report.mass_outside);
  CHECK(back.iterations_run == report.iterations_run);
  CHECK(back.converged == report.converged);
  CHECK(back.per_iter_ll.empty());  // the trace is not serialized
  CHECK(back.config.n_states == report.config.n_states);
  CHECK(back.config.max_iters == report.config.max_iters);
  CHECK(back.config.rel_ll_tol == report.config.rel_ll_tol);
  CHECK(back.config.warm_start == report.config.warm_start);
  CHECK(back.config.warm_fraction_iters == report.config.warm_fraction_iters);
  CHECK(back.config.warm_data_stride == report.config.warm_data_stride);
  CHECK(back.config.bisection_tol == report.config.bisection_tol);
  CHECK(back.config.c_margin == report.config.c_margin);
  CHECK(back.config.seed == report.config.seed);
}

TEST_CASE("model loader rejects unknown keys at every level") {
  const FitReport report = small_fit();
  const std::string path = tmp_path("model_for_tampering.json");
  io::save_model(path, report);
  const json good = load_json(path);
  CHECK_NOTHROW(io::load_model(path));

  json doc = good;
  doc["surprise"] = 1;
  expect_load_fails(doc, "top");
  doc = good;
  doc["states"][0]["surprise"] = 1;
  expect_load_fails(doc, "state");
  doc = good;
  doc["fit"]["surprise"] = 1;
  expect_load_fails(doc, "fit");
  doc = good;
  doc["fit"]["config"]["surprise"] = 1;
  expect_load_fails(doc, "config");
}

TEST_CASE("model loader enforces schema and value constraints") {
  const FitReport report = small_fit();
  const std::string path = tmp_path("model_schema.json");
  io::save_model(path, report);
  const json good = load_json(path);

  json doc = good;
  doc["format_version"] = 2;
  expect_load_fails(doc, "version");
  doc = good;
  doc.erase("mass_outside");
  expect_load_fails(doc, "missing");
  doc = good;
  doc["n_states"] = 7;
  expect_load_fails(doc, "nstates");
  doc = good;
  doc["states"] = json::array();
  doc["n_states"] = 0;
  expect_load_fails(doc, "empty");
  doc = good;
  doc["log_likelihood"] = "very good";
  expect_load_fails(doc, "llstring");
  doc = good;
  doc["states"][0]["alpha"] = -1.0;
  expect_load_fails(doc, "negalpha");

  const std::string garbled = tmp_path("garbled.json");
  spit(garbled, "{\"format_version\": 1,,,");
  CHECK_THROWS_AS(io::load_model(garbled), ParseError);
  spit(garbled, "[1, 2, 3]");
  CHECK_THROWS_AS(io::load_model(garbled), ParseError);
}

TEST_CASE("model loader checks weights and canonical order") {
  const FitReport report = small_fit(2);
  REQUIRE(report.model.n_states() == 2);
  const std::string path = tmp_path("model_weights.json");
  io::save_model(path, report);
  const json good = load_json(path);

  // Off by 1e-8: rejected.
  json doc = good;
  doc["states"][0]["tau"] = doc["states"][0]["tau"].get<double>() + 1e-8;
  expect_load_fails(doc, "weightsum");

  // Off by well under 1e-9: accepted and renormalized.
  doc = good;
  doc["states"][0]["tau"] = doc["states"][0]["tau"].get<double>() + 4e-10;
  const std::string nudged = tmp_path("model_nudged.json");
  spit(nudged, doc.dump(2));
  const FitReport renorm = io::load_model(nudged);
  CHECK(renorm.model.weight(0) + renorm.model.weight(1) ==
        doctest::Approx(1.0).epsilon(1e-15));

  // Descending-mean order violates the canonical-order invariant.
  doc = good;
  std::swap(doc["states"][0], doc["states"][1]);
  expect_load_fails(doc, "order");
}

TEST_CASE("embedding files parse with uniform dimensions") {
  const std::string path = tmp_path("embeddings.csv");
  spit(path, "# two vectors\n1,2,3\n4,5,6\n");
  const auto rows = io::read_embeddings(path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(rows[1] == std::vector<double>{4.0, 5.0, 6.0});

  spit(path, "1,2\n1,2,3\n");
  try {
    io::read_embeddings(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  spit(path, "# only a comment\n");
  CHECK_THROWS_AS(io::read_embeddings(path), ParseError);
}

TEST_CASE("cosine similarities: frozen value, clamping, and guards") {
  const auto sims =
      io::cosine_similarities({1.0, 2.0, 3.0}, {{4.0, 5.0, 6.0}});
  REQUIRE(sims.size() == 1);
  CHECK(sims[0] ==
        doctest::Approx(0.974631846197076271079).epsilon(1e-15));

  // A vector against itself can round above 1; the result must be clamped.
  const std::vector<double> v{0.1, 0.2, 0.3, 0.7, 1.9, -2.2, 0.004};
  const auto self = io::cosine_similarities(v, {v, v, v});
  for (double s : self) {
    CHECK(s <= 1.0);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }

  CHECK_THROWS_AS(io::cosine_similarities({0.0, 0.0}, {{1.0, 2.0}}),
                  std::invalid_argument);
  try {
    io::cosine_similarities({1.0, 2.0}, {{1.0, 1.0}, {0.0, 0.0}});
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
  CHECK_THROWS_AS(io::cosine_similarities({1.0, 2.0}, {{1.0, 2.0, 3.0}}),
                  std::invalid_argument);
}

TEST_CASE("similarity matrices round-trip through CSV") {
  gammix::SimilarityMatrix S;
  S.n_queries = 2;
  S.n_candidates = 3;
  S.entries = {0.1, -0.25, 0.97463184619707627, 0.5, 0.0, -1.0};
  const std::string path = tmp_path("simmatrix.csv");
  io::write_sim_matrix(path, S);
  const auto back = io::read_sim_matrix(path);
  CHECK(back.n_queries == 2);
  CHECK(back.n_candidates == 3);
  CHECK(back.entries == S.entries);

  spit(path, "0.1,0.2\n0.3\n");
  CHECK_THROWS_AS(io::read_sim_matrix(path), ParseError);
}

TEST_CASE("density table integrates to one next to the data histogram") {
  const FitReport report = small_fit();
  const GammaMixture& m = report.model;
  const auto xs = m.sample(20000, 17);
  const auto table = io::density_table(m, xs, 80);
  REQUIRE(table.x.size() == 80);
  const double width = table.x[1] - table.x[0];

  double empirical_mass = 0.0, fitted_mass = 0.0;
  for (std::size_t b = 0; b < table.x.size(); ++b) {
    empirical_mass += table.empirical[b] * width;
    fitted_mass += table.fitted[b] * width;
    double per_state_sum = 0.0;
    for (const auto& row : table.per_state) per_state_sum += row[b];
    CHECK(per_state_sum == doctest::Approx(table.fitted[b]).epsilon(1e-12));
  }
  CHECK(empirical_mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fitted_mass == doctest::Approx(1.0).epsilon(0.01));

  const std::string path = tmp_path("density.csv");
  io::write_density_csv(path, table);
  const std::string text = slurp(path);
  CHECK(text.find("x,empirical_density,fitted_density,state_1") !=
        std::string::npos);
  CHECK_THROWS_AS(io::density_table(m, xs, 0), std::invalid_argument);
}

// ---- CLI behavior through a real subprocess ----

TEST_CASE("cli: fit writes a loadable model and prints a summary") {
  const ShiftedGamma g(13.3, -0.28, 35.5);
  const std::string scores = tmp_path("cli_fit_scores.txt");
  io::write_scores(scores, g.sample(4000, 404));
  const std::string model = tmp_path("cli_fit_model.json");

  const auto res = run_cli(
      "fit " + scores + " --states 1 --max-iters 2000 --seed 5 --out " + model,
      "fit_ok");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("state tau alpha c lambda") != std::string::npos);
  CHECK(res.out.find("log_likelihood") != std::string::npos);
  const FitReport loaded = io::load_model(model);
  CHECK(loaded.model.component(0).alpha() == doctest::Approx(13.3).epsilon(0.3));

  // Density export alongside the fit.
  const std::string density = tmp_path("cli_fit_density.csv");
  const auto res2 = run_cli("fit " + scores + " --states 1 --max-iters 50" +
                                " --density-out " + density + " --bins 40",
                            "fit_density");
  CHECK(res2.exit_code == 0);
  CHECK(slurp(density).find("x,empirical_density") != std::string::npos);
}

TEST_CASE("cli: exit codes distinguish failure classes") {
  const std::string empty = tmp_path("cli_empty.txt");
  spit(empty, "# nothing here\n");
  CHECK(run_cli("fit " + empty, "fit_empty").exit_code == 4);

  const std::string malformed = tmp_path("cli_malformed.txt");
  spit(malformed, "0.5\nbroken\n");
  const auto res = run_cli("fit " + malformed, "fit_malformed");
  CHECK(res.exit_code == 2);
  CHECK(res.err.find("error:") != std::string::npos);

  // Unknown flag: usage error from the parser.
  CHECK(run_cli("fit " + empty + " --definitely-not-a-flag", "fit_badflag")
            .exit_code == 2);
  // Missing subcommand.
  CHECK(run_cli("", "no_subcommand").exit_code == 2);
  // Nonexistent model file.
  CHECK(run_cli("sample " + tmp_path("ghost.json") + " --n 3 --out " +
                    tmp_path("ghost_out.txt"),
                "sample_ghost")
            .exit_code == 2);
}

TEST_CASE("cli: sample is deterministic and honors n") {
  const FitReport report = small_fit();
  const std::string model = tmp_path("cli_sample_model.json");
  io::save_model(model, report);

  const std::string out_a = tmp_path("cli_sample_a.txt");
  const std::string out_b = tmp_path("cli_sample_b.txt");
  CHECK(run_cli("sample " + model + " --n 64 --seed 9 --out " + out_a,
                "sample_a")
            .exit_code == 0);
  CHECK(run_cli("sample " + model + " --n 64 --seed 9 --out " + out_b,
                "sample_b")
            .exit_code == 0);
  CHECK(slurp(out_a) == slurp(out_b));
  CHECK(io::read_scores(out_a).values.size() == 64);

  const std::string out_zero = tmp_path("cli_sample_zero.txt");
  CHECK(run_cli("sample " + model + " --n 0 --out " + out_zero, "sample_zero")
            .exit_code == 0);
  CHECK(io::read_scores(out_zero).values.empty());
}

TEST_CASE("cli: simulate writes leveled scores and enforces the cap") {
  const std::string out = tmp_path("cli_sim.txt");
  const auto res = run_cli(
      "simulate --depth 1 --eta 0.9 --degree 1 --dim 8 --out " + out,
      "sim_single");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("rows 1") != std::string::npos);
  const auto scores = io::read_scores(out);
  REQUIRE(scores.values.size() == 1);
  CHECK(scores.values[0] == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(scores.has_levels());
  CHECK(scores.levels[0] == 1);

  // Two identical runs produce byte-identical files.
  const std::string out2 = tmp_path("cli_sim2.txt");
  run_cli("simulate --depth 5 --eta 0.95 --degree 2 --dim 16 --seed 3 --out " +
              out,
          "sim_rep_a");
  run_cli("simulate --depth 5 --eta 0.95 --degree 2 --dim 16 --seed 3 --out " +
              out2,
          "sim_rep_b");
  CHECK(slurp(out) == slurp(out2));

  CHECK(run_cli("simulate --depth 25 --eta 0.9 --degree 2 --out " +
                    tmp_path("cli_sim_cap.txt"),
                "sim_cap")
            .exit_code == 5);
}

TEST_CASE("cli: pvalue prints the survival function") {
  const FitReport report = small_fit();
  const std::string model = tmp_path("cli_pvalue_model.json");
  io::save_model(model, report);

  const auto res = run_cli("pvalue " + model + " --x -1 --x 0.99", "pvalue");
  CHECK(res.exit_code == 0);
  std::istringstream lines(res.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "x p_value");
  double x = 0.0, p = 0.0;
  lines >> x >> p;
  CHECK(x == -1.0);
  CHECK(p == 1.0);  // below the support everything is at least as extreme
  lines >> x >> p;
  CHECK(x == 0.99);
  // The CLI prints the survival function of whatever model the file holds.
  CHECK(p == doctest::Approx(p_value(report.model, 0.99)).epsilon(1e-12));
  CHECK(p < 1e-3);

  // Neither --x nor --scores given.
  CHECK(run_cli("pvalue " + model, "pvalue_noargs").exit_code == 2);
}

TEST_CASE("cli: match reports pairs and Fisher combination") {
  const FitReport report = small_fit();
  const std::string model = tmp_path("cli_match_model.json");
  io::save_model(model, report);
  const std::string matrix = tmp_path("cli_match_matrix.csv");
  spit(matrix, "0.31\n");

  const auto res = run_cli("match " + matrix + " --nulls " + model, "match_1x1");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("query candidate similarity p_value") !=
        std::string::npos);
  CHECK(res.out.find("combined_p") != std::string::npos);
  std::istringstream lines(res.out);
  std::string header;
  std::getline(lines, header);
  std::size_t q = 99, d = 99;
  double sim = 0.0;
  lines >> q >> d >> sim;
  CHECK(q == 0);
  CHECK(d == 0);
  CHECK(sim == 0.31);

  // Two queries, three null files: count mismatch.
  spit(matrix, "0.3,0.4\n0.1,0.2\n");
  const auto bad = run_cli("match " + matrix + " --nulls " + model + " " +
                               model + " " + model,
                           "match_badcount");
  CHECK(bad.exit_code == 2);

  // A single null broadcasts across queries.
  const auto broadcast =
      run_cli("match " + matrix + " --nulls " + model + " --one-to-one",
              "match_broadcast");
  CHECK(broadcast.exit_code == 0);
}

TEST_CASE("cli: cossim prints the matrix it would write") {
  const std::string queries = tmp_path("cli_cossim_q.csv");
  const std::string docs = tmp_path("cli_cossim_d.csv");
  spit(queries, "1,0\n");
  spit(docs, "1,0\n0,1\n");
  const auto res = run_cli("cossim " + queries + " " + docs, "cossim");
  CHECK(res.exit_code == 0);
  CHECK(res.out == "1,0\n");

  const std::string out = tmp_path("cli_cossim_out.csv");
  run_cli("cossim " + queries + " " + docs + " --out " + out, "cossim_out");
  const auto S = io::read_sim_matrix(out);
  CHECK(S.n_queries == 1);
  CHECK(S.n_candidates == 2);
  CHECK(S.at(0, 0) == 1.0);
  CHECK(S.at(0, 1) == 0.0);

  spit(docs, "1,0\n0,0\n");
  CHECK(run_cli("cossim " + queries + " " + docs, "cossim_zero").exit_code ==
        2);
}

TEST_CASE("cli: bench runs a miniature comparison") {
  const auto res =
      run_cli("bench --n 2000 --repeats 1 --states-list 1", "bench");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("states warm_ms cold_ms speedup ll_rel_delta") !=
        std::string::npos);
  std::istringstream lines(res.out);
  std::string header;
  std::getline(lines, header);
  int s = 0;
  double warm = 0.0, cold = 0.0;
  lines >> s >> warm >> cold;
  CHECK(s == 1);
  CHECK(warm > 0.0);
  CHECK(cold > 0.0);
}
