#include "gammix/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gammix/errors.hpp"

namespace gammix::io {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open for reading");
  return in;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  return out;
}

bool is_comment_or_blank(const std::string& line) {
  for (char ch : line) {
    if (ch == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(ch))) return false;
  }
  return true;  // blank
}

double parse_double(const std::string& token, const std::string& path,
                    std::size_t line_no) {
  // strtod instead of stod: stod throws on subnormal underflow, but a tiny
  // p-value is a legitimate score-file entry.  Only overflow and trailing
  // garbage are malformed.
  const char* begin = token.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end != begin + token.size() || end == begin ||
      (errno == ERANGE && std::fabs(v) == HUGE_VAL))
    throw ParseError(path + ":" + std::to_string(line_no) + ": '" + token +
                     "' is not a number");
  if (!std::isfinite(v))
    throw ParseError(path + ":" + std::to_string(line_no) +
                     ": non-finite value '" + token + "'");
  return v;
}

long parse_int(const std::string& token, const std::string& path,
               std::size_t line_no) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(token, &pos);
  } catch (const std::exception&) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": '" + token +
                     "' is not an integer");
  }
  if (pos != token.size())
    throw ParseError(path + ":" + std::to_string(line_no) + ": '" + token +
                     "' is not an integer");
  return v;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream iss(line);
  std::vector<std::string> tokens;
  std::string tok;
  while (iss >> tok) tokens.push_back(tok);
  return tokens;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> tokens;
  std::string tok;
  std::istringstream iss(line);
  while (std::getline(iss, tok, ',')) {
    // Trim surrounding whitespace.
    const auto b = tok.find_first_not_of(" \t\r");
    const auto e = tok.find_last_not_of(" \t\r");
    tokens.push_back(b == std::string::npos ? std::string()
                                            : tok.substr(b, e - b + 1));
  }
  return tokens;
}

// Rejects any key in `obj` that is not in `allowed`.
void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& path, const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key()))
      throw ParseError(path + ": unknown field '" + item.key() + "' in " +
                       where);
  }
}

const json& require(const json& obj, const std::string& key,
                    const std::string& path, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ParseError(path + ": missing field '" + key + "' in " + where);
  return *it;
}

double as_number(const json& v, const std::string& path,
                 const std::string& what) {
  if (!v.is_number())
    throw ParseError(path + ": field '" + what + "' must be a number");
  return v.get<double>();
}

}  // namespace

ScoreData read_scores(const std::string& path) {
  std::ifstream in = open_for_read(path);
  ScoreData data;
  std::string line;
  std::size_t line_no = 0;
  int n_columns = 0;  // established by the first data line
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const std::vector<std::string> tokens = split_ws(line);
    if (tokens.size() > 2)
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected 1 or 2 columns, got " +
                       std::to_string(tokens.size()));
    if (n_columns == 0) n_columns = static_cast<int>(tokens.size());
    if (static_cast<int>(tokens.size()) != n_columns)
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": inconsistent column count");
    data.values.push_back(parse_double(tokens[0], path, line_no));
    if (n_columns == 2)
      data.levels.push_back(
          static_cast<int>(parse_int(tokens[1], path, line_no)));
  }
  return data;
}

void write_scores(const std::string& path, std::span<const double> values,
                  std::span<const int> levels, const std::string& header) {
  if (!levels.empty() && levels.size() != values.size())
    throw std::invalid_argument("write_scores: levels/values length mismatch");
  std::ofstream out = open_for_write(path);
  if (!header.empty()) {
    std::istringstream iss(header);
    std::string line;
    while (std::getline(iss, line)) out << "# " << line << "\n";
  }
  for (std::size_t t = 0; t < values.size(); ++t) {
    out << fmt17(values[t]);
    if (!levels.empty()) out << " " << levels[t];
    out << "\n";
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

void save_model(const std::string& path, const FitReport& report) {
  const GammaMixture& m = report.model;
  json states = json::array();
  for (std::size_t i = 0; i < m.n_states(); ++i) {
    const ShiftedGamma& g = m.component(i);
    states.push_back({{"tau", m.weight(i)},
                      {"alpha", g.alpha()},
                      {"c", g.shift()},
                      {"lambda", g.rate()}});
  }
  const FitConfig& cfg = report.config;
  json doc = {
      {"format_version", 1},
      {"n_states", m.n_states()},
      {"states", states},
      {"log_likelihood", report.log_likelihood},
      {"n_samples", report.n_samples},
      {"mass_outside", report.mass_outside},
      {"fit",
       {{"iterations", report.iterations_run},
        {"converged", report.converged},
        {"seed", cfg.seed},
        {"config",
         {{"n_states", cfg.n_states},
          {"max_iters", cfg.max_iters},
          {"rel_ll_tol", cfg.rel_ll_tol},
          {"warm_start", cfg.warm_start},
          {"warm_fraction_iters", cfg.warm_fraction_iters},
          {"warm_data_stride", cfg.warm_data_stride},
          {"bisection_tol", cfg.bisection_tol},
          {"c_margin", cfg.c_margin},
          {"seed", cfg.seed}}}}},
  };
  std::ofstream out = open_for_write(path);
  out << doc.dump(2) << "\n";
  if (!out) throw std::runtime_error(path + ": write failed");
}

FitReport load_model(const std::string& path) {
  std::ifstream in = open_for_read(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& err) {
    throw ParseError(path + ": " + err.what());
  }
  if (!doc.is_object()) throw ParseError(path + ": top level must be an object");
  check_keys(doc,
             {"format_version", "n_states", "states", "log_likelihood",
              "n_samples", "mass_outside", "fit"},
             path, "top level");

  if (require(doc, "format_version", path, "top level") != 1)
    throw ParseError(path + ": unsupported format_version");

  const json& states = require(doc, "states", path, "top level");
  if (!states.is_array() || states.empty())
    throw ParseError(path + ": 'states' must be a non-empty array");
  const auto n_states = require(doc, "n_states", path, "top level");
  if (!n_states.is_number_integer() ||
      n_states.get<std::size_t>() != states.size())
    throw ParseError(path + ": n_states does not match the states array");

  std::vector<ShiftedGamma> components;
  std::vector<double> weights;
  for (const json& st : states) {
    if (!st.is_object()) throw ParseError(path + ": state must be an object");
    check_keys(st, {"tau", "alpha", "c", "lambda"}, path, "state");
    const double tau = as_number(require(st, "tau", path, "state"), path, "tau");
    const double alpha =
        as_number(require(st, "alpha", path, "state"), path, "alpha");
    const double c = as_number(require(st, "c", path, "state"), path, "c");
    const double lambda =
        as_number(require(st, "lambda", path, "state"), path, "lambda");
    try {
      components.emplace_back(alpha, c, lambda);
    } catch (const std::logic_error& err) {
      throw ParseError(path + ": invalid state parameters: " + err.what());
    }
    weights.push_back(tau);
  }

  double weight_sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ParseError(path + ": tau must be >= 0");
    weight_sum += w;
  }
  if (std::fabs(weight_sum - 1.0) > 1e-9)
    throw ParseError(path + ": weights sum to " + fmt17(weight_sum) +
                     ", expected 1 within 1e-9");
  for (double& w : weights) w /= weight_sum;

  GammaMixture model(components, weights);
  // The constructor canonicalizes; a reordering means the file violated the
  // canonical-order invariant.
  for (std::size_t i = 0; i < model.n_states(); ++i) {
    if (model.component(i).alpha() != components[i].alpha() ||
        model.component(i).shift() != components[i].shift() ||
        model.component(i).rate() != components[i].rate())
      throw ParseError(path +
                       ": states are not in canonical order (ascending mean)");
  }

  const json& fit_meta = require(doc, "fit", path, "top level");
  if (!fit_meta.is_object()) throw ParseError(path + ": 'fit' must be an object");
  check_keys(fit_meta, {"iterations", "converged", "seed", "config"}, path,
             "fit");
  const json& cfg_echo = require(fit_meta, "config", path, "fit");
  if (!cfg_echo.is_object())
    throw ParseError(path + ": 'fit.config' must be an object");
  check_keys(cfg_echo,
             {"n_states", "max_iters", "rel_ll_tol", "warm_start",
              "warm_fraction_iters", "warm_data_stride", "bisection_tol",
              "c_margin", "seed"},
             path, "fit.config");

  FitConfig cfg;
  cfg.n_states = require(cfg_echo, "n_states", path, "fit.config").get<int>();
  cfg.max_iters = require(cfg_echo, "max_iters", path, "fit.config").get<int>();
  cfg.rel_ll_tol = as_number(require(cfg_echo, "rel_ll_tol", path, "fit.config"),
                             path, "rel_ll_tol");
  const json& ws = require(cfg_echo, "warm_start", path, "fit.config");
  if (!ws.is_boolean()) throw ParseError(path + ": warm_start must be boolean");
  cfg.warm_start = ws.get<bool>();
  cfg.warm_fraction_iters =
      as_number(require(cfg_echo, "warm_fraction_iters", path, "fit.config"),
                path, "warm_fraction_iters");
  cfg.warm_data_stride =
      require(cfg_echo, "warm_data_stride", path, "fit.config").get<int>();
  cfg.bisection_tol =
      as_number(require(cfg_echo, "bisection_tol", path, "fit.config"), path,
                "bisection_tol");
  cfg.c_margin = as_number(require(cfg_echo, "c_margin", path, "fit.config"),
                           path, "c_margin");
  cfg.seed = require(cfg_echo, "seed", path, "fit.config").get<std::uint64_t>();

  const json& conv = require(fit_meta, "converged", path, "fit");
  if (!conv.is_boolean()) throw ParseError(path + ": converged must be boolean");

  FitReport report{
      std::move(model),
      as_number(require(doc, "log_likelihood", path, "top level"), path,
                "log_likelihood"),
      require(fit_meta, "iterations", path, "fit").get<int>(),
      conv.get<bool>(),
      as_number(require(doc, "mass_outside", path, "top level"), path,
                "mass_outside"),
      {},  // per-iteration trace is not serialized
      0,
      0,
      0,
      require(doc, "n_samples", path, "top level").get<std::size_t>(),
      cfg};
  return report;
}

std::vector<std::vector<double>> read_embeddings(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const std::vector<std::string> tokens = split_commas(line);
    std::vector<double> row;
    row.reserve(tokens.size());
    for (const std::string& tok : tokens)
      row.push_back(parse_double(tok, path, line_no));
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(rows.front().size()) +
                       " columns, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": no vectors found");
  return rows;
}

std::vector<double> cosine_similarities(
    const std::vector<double>& query,
    const std::vector<std::vector<double>>& docs) {
  double q_sq = 0.0;
  for (double v : query) q_sq += v * v;
  if (!(q_sq > 0.0))
    throw std::invalid_argument("cosine_similarities: query has zero norm");
  const double q_norm = std::sqrt(q_sq);

  std::vector<double> sims;
  sims.reserve(docs.size());
  for (std::size_t j = 0; j < docs.size(); ++j) {
    const std::vector<double>& d = docs[j];
    if (d.size() != query.size())
      throw std::invalid_argument(
          "cosine_similarities: doc row " + std::to_string(j) + " has " +
          std::to_string(d.size()) + " dims, query has " +
          std::to_string(query.size()));
    double dot = 0.0, d_sq = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      dot += query[k] * d[k];
      d_sq += d[k] * d[k];
    }
    if (!(d_sq > 0.0))
      throw std::invalid_argument("cosine_similarities: doc row " +
                                  std::to_string(j) + " has zero norm");
    sims.push_back(
        std::clamp(dot / (q_norm * std::sqrt(d_sq)), -1.0, 1.0));
  }
  return sims;
}

SimilarityMatrix read_sim_matrix(const std::string& path) {
  std::ifstream in = open_for_read(path);
  SimilarityMatrix S;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const std::vector<std::string> tokens = split_commas(line);
    if (S.n_queries == 0) {
      S.n_candidates = tokens.size();
    } else if (tokens.size() != S.n_candidates) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(S.n_candidates) + " columns, got " +
                       std::to_string(tokens.size()));
    }
    for (const std::string& tok : tokens)
      S.entries.push_back(parse_double(tok, path, line_no));
    ++S.n_queries;
  }
  try {
    S.validate();
  } catch (const std::invalid_argument& err) {
    throw ParseError(path + ": " + err.what());
  }
  return S;
}

void write_sim_matrix(const std::string& path, const SimilarityMatrix& S) {
  S.validate();
  std::ofstream out = open_for_write(path);
  for (std::size_t q = 0; q < S.n_queries; ++q) {
    for (std::size_t d = 0; d < S.n_candidates; ++d) {
      if (d > 0) out << ",";
      out << fmt17(S.at(q, d));
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

DensityTable density_table(const GammaMixture& m, std::span<const double> xs,
                           int n_bins) {
  if (n_bins < 1) throw std::invalid_argument("density_table: n_bins >= 1");
  if (xs.empty()) throw std::invalid_argument("density_table: empty data");
  const auto [min_it, max_it] = std::minmax_element(xs.begin(), xs.end());
  const double lo = *min_it - 0.02;
  const double hi = *max_it + 0.02;
  const double width = (hi - lo) / n_bins;

  DensityTable table;
  table.x.resize(static_cast<std::size_t>(n_bins));
  table.empirical.assign(static_cast<std::size_t>(n_bins), 0.0);
  table.fitted.resize(static_cast<std::size_t>(n_bins));
  table.per_state.assign(m.n_states(),
                         std::vector<double>(static_cast<std::size_t>(n_bins)));

  for (double v : xs) {
    int bin = static_cast<int>(std::floor((v - lo) / width));
    bin = std::max(0, std::min(n_bins - 1, bin));
    table.empirical[static_cast<std::size_t>(bin)] += 1.0;
  }
  const double denom = static_cast<double>(xs.size()) * width;
  for (double& v : table.empirical) v /= denom;

  for (int b = 0; b < n_bins; ++b) {
    const double x = lo + (b + 0.5) * width;
    table.x[static_cast<std::size_t>(b)] = x;
    table.fitted[static_cast<std::size_t>(b)] = std::exp(m.log_pdf(x));
    for (std::size_t i = 0; i < m.n_states(); ++i)
      table.per_state[i][static_cast<std::size_t>(b)] =
          m.weight(i) * std::exp(m.component(i).log_pdf(x));
  }
  return table;
}

void write_density_csv(const std::string& path, const DensityTable& table) {
  std::ofstream out = open_for_write(path);
  out << "x,empirical_density,fitted_density";
  for (std::size_t i = 0; i < table.per_state.size(); ++i)
    out << ",state_" << (i + 1);
  out << "\n";
  for (std::size_t b = 0; b < table.x.size(); ++b) {
    out << fmt17(table.x[b]) << "," << fmt17(table.empirical[b]) << ","
        << fmt17(table.fitted[b]);
    for (const std::vector<double>& state : table.per_state)
      out << "," << fmt17(state[b]);
    out << "\n";
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace gammix::io
