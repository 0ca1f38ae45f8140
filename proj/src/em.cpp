#include "gammix/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gammix/errors.hpp"
#include "gammix/special_functions.hpp"
#include "gammix/stats.hpp"

namespace gammix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAlphaBracketLo = 1e-6;
constexpr double kAlphaBracketHi = 1e6;
// Below this alpha the score in c is increasing and pushes the shift into
// the boundary, so the c update is skipped.
constexpr double kAlphaCUpdateFloor = 1.0 + 1e-6;
constexpr int kMaxBisectIters = 200;

double span_or_tiny(double lo, double hi) { return std::max(hi - lo, 1e-12); }

}  // namespace

void ScoreSample::validate() const {
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (!std::isfinite(values[t]))
      throw std::invalid_argument("ScoreSample: non-finite value at index " +
                                  std::to_string(t));
  }
  if (bounds) {
    const auto [lo, hi] = *bounds;
    if (!(lo < hi))
      throw std::invalid_argument("ScoreSample: bounds must satisfy lo < hi");
    for (std::size_t t = 0; t < values.size(); ++t) {
      if (values[t] < lo || values[t] > hi)
        throw std::invalid_argument(
            "ScoreSample: value at index " + std::to_string(t) +
            " outside bounds [" + std::to_string(lo) + ", " +
            std::to_string(hi) + "]");
    }
  }
}

void FitConfig::validate() const {
  if (n_states < 1) throw std::invalid_argument("FitConfig: n_states >= 1");
  if (max_iters < 1) throw std::invalid_argument("FitConfig: max_iters >= 1");
  if (!(rel_ll_tol > 0.0))
    throw std::invalid_argument("FitConfig: rel_ll_tol > 0");
  if (!(warm_fraction_iters > 0.0 && warm_fraction_iters < 1.0))
    throw std::invalid_argument("FitConfig: warm_fraction_iters in (0,1)");
  if (warm_data_stride < 1)
    throw std::invalid_argument("FitConfig: warm_data_stride >= 1");
  if (!(bisection_tol > 0.0))
    throw std::invalid_argument("FitConfig: bisection_tol > 0");
  if (!(c_margin > 0.0)) throw std::invalid_argument("FitConfig: c_margin > 0");
}

EStepResult e_step(const GammaMixture& m, std::span<const double> xs) {
  const std::size_t s = m.n_states();
  const std::size_t n = xs.size();
  Responsibilities r(n, s);

  // Per-component constants hoisted out of the sample loop.
  std::vector<double> base(s), am1(s), shift(s), rate(s);
  for (std::size_t i = 0; i < s; ++i) {
    const ShiftedGamma& g = m.component(i);
    base[i] = (m.weight(i) > 0.0 ? std::log(m.weight(i)) : -kInf) +
              g.log_norm();
    am1[i] = g.alpha() - 1.0;
    shift[i] = g.shift();
    rate[i] = g.rate();
  }

  std::vector<double> ll_terms(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double x = xs[t];
    double max_term = -kInf;
    for (std::size_t i = 0; i < s; ++i) {
      const double z = x - shift[i];
      const double term =
          z > 0.0 ? base[i] + am1[i] * std::log(z) - rate[i] * z : -kInf;
      r.at(t, i) = term;
      max_term = std::max(max_term, term);
    }
    if (!std::isfinite(max_term))
      throw FitError("e_step: sample " + std::to_string(t) + " (value " +
                     std::to_string(x) + ") lies below every component shift");
    double sum = 0.0;
    for (std::size_t i = 0; i < s; ++i) {
      const double w = std::exp(r.at(t, i) - max_term);
      r.at(t, i) = w;
      sum += w;
    }
    for (std::size_t i = 0; i < s; ++i) r.at(t, i) /= sum;
    ll_terms[t] = max_term + std::log(sum);
  }
  return {std::move(r), pairwise_sum(ll_terms)};
}

std::vector<double> update_tau(const Responsibilities& r) {
  const std::size_t s = r.n_states();
  std::vector<double> col(s, 0.0);
  for (std::size_t t = 0; t < r.n_samples(); ++t)
    for (std::size_t i = 0; i < s; ++i) col[i] += r.at(t, i);
  const double total = std::accumulate(col.begin(), col.end(), 0.0);
  if (!(total > 0.0)) throw FitError("update_tau: no responsibility mass");
  for (double& v : col) v /= total;
  return col;
}

double weighted_kappa(const Responsibilities& r, std::span<const double> xs,
                      std::size_t i, double c_i) {
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const double g = r.at(t, i);
    if (g <= 0.0) continue;
    num += g;
    den += g * (xs[t] - c_i);
  }
  if (!(num > 0.0))
    throw FitError("weighted_kappa: component " + std::to_string(i) +
                   " has no responsibility mass");
  if (!(den > 0.0))
    throw FitError("weighted_kappa: nonpositive weighted mean for component " +
                   std::to_string(i));
  return num / den;
}

double update_alpha(const Responsibilities& r, std::span<const double> xs,
                    std::size_t i, double c_i, double kappa_i,
                    double bisection_tol) {
  if (!(kappa_i > 0.0)) throw FitError("update_alpha: kappa must be > 0");
  double mass = 0.0, sum_log = 0.0, sum_lin = 0.0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const double g = r.at(t, i);
    if (g <= 0.0) continue;
    const double z = xs[t] - c_i;
    mass += g;
    sum_log += g * std::log(z);
    sum_lin += g * z;
  }
  if (!(mass > 0.0))
    throw FitError("update_alpha: component " + std::to_string(i) +
                   " has no responsibility mass");

  const double log_kappa = std::log(kappa_i);
  // Strictly decreasing in alpha: d/da = mass (1/a - psi'(a)) < 0.
  const auto score = [&](double a) {
    return sum_log - kappa_i * sum_lin +
           mass * (std::log(a) + 1.0 + log_kappa - sf::digamma(a));
  };

  double lo = 1.0, hi = 1.0;
  double f_lo = score(1.0);
  double f_hi = f_lo;
  if (f_lo == 0.0) return 1.0;
  if (f_lo > 0.0) {
    while (f_hi > 0.0) {
      hi *= 2.0;
      if (hi > kAlphaBracketHi)
        throw FitError("update_alpha: no sign change up to alpha = 1e6");
      f_hi = score(hi);
    }
    lo = hi / 2.0;
  } else {
    while (f_lo < 0.0) {
      lo /= 2.0;
      if (lo < kAlphaBracketLo)
        throw FitError("update_alpha: no sign change down to alpha = 1e-6");
      f_lo = score(lo);
    }
    hi = lo * 2.0;
  }
  for (int iter = 0; iter < kMaxBisectIters && hi - lo > bisection_tol;
       ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (score(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

// Partial objective in c for fixed alpha and lambda (tau and normalizer
// terms dropped); used to arbitrate clamped shift updates.
double c_section_objective(const Responsibilities& r,
                           std::span<const double> xs, std::size_t i,
                           double alpha_i, double lambda_i, double c) {
  double acc = 0.0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const double g = r.at(t, i);
    if (g <= 0.0) continue;
    const double z = xs[t] - c;
    if (!(z > 0.0)) return -kInf;
    acc += g * ((alpha_i - 1.0) * std::log(z) - lambda_i * z);
  }
  return acc;
}

}  // namespace

CUpdateResult update_c(const Responsibilities& r, std::span<const double> xs,
                       std::size_t i, double alpha_i, double lambda_i,
                       double current_c, double c_margin,
                       double bisection_tol) {
  if (alpha_i <= kAlphaCUpdateFloor) return {current_c, false};

  double x_min = kInf, x_max = -kInf, mass = 0.0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const double g = r.at(t, i);
    if (g <= 0.0) continue;
    mass += g;
    x_min = std::min(x_min, xs[t]);
    x_max = std::max(x_max, xs[t]);
  }
  if (!(mass > 0.0))
    throw FitError("update_c: component " + std::to_string(i) +
                   " has no responsibility mass");

  const double span = span_or_tiny(x_min, x_max);
  const double lo = x_min - 10.0 * span;
  const double hi = x_min - c_margin * span;

  // Strictly decreasing in c for alpha > 1.
  const auto score = [&](double c) {
    double acc = 0.0;
    for (std::size_t t = 0; t < xs.size(); ++t) {
      const double g = r.at(t, i);
      if (g <= 0.0) continue;
      acc += g * (1.0 - alpha_i) / (xs[t] - c);
    }
    return acc + lambda_i * mass;
  };

  const double f_lo = score(lo);
  const double f_hi = score(hi);
  double candidate;
  bool clamped = false;
  if (f_lo <= 0.0) {
    candidate = lo;  // root lies left of the bracket
    clamped = true;
  } else if (f_hi >= 0.0) {
    candidate = hi;  // root lies right of the bracket
    clamped = true;
  } else {
    double a = lo, b = hi;
    for (int iter = 0; iter < kMaxBisectIters && b - a > bisection_tol;
         ++iter) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (score(mid) >= 0.0) {
        a = mid;
      } else {
        b = mid;
      }
    }
    candidate = 0.5 * (a + b);
  }

  if (clamped) {
    // The concave section argmax escaped the bracket; keep whichever of the
    // clamped point and the current shift scores better so the step never
    // regresses.
    const double cand_obj =
        c_section_objective(r, xs, i, alpha_i, lambda_i, candidate);
    const double curr_obj =
        c_section_objective(r, xs, i, alpha_i, lambda_i, current_c);
    if (curr_obj > cand_obj) candidate = current_c;
  }
  return {candidate, clamped};
}

EmStepResult em_step(const GammaMixture& m, std::span<const double> xs,
                     const FitConfig& cfg) {
  EStepResult es = e_step(m, xs);
  const std::vector<double> tau = update_tau(es.gamma);

  std::vector<ShiftedGamma> updated;
  updated.reserve(m.n_states());
  int clamps = 0;
  for (std::size_t i = 0; i < m.n_states(); ++i) {
    const ShiftedGamma& g = m.component(i);
    const CUpdateResult cu =
        update_c(es.gamma, xs, i, g.alpha(), g.rate(), g.shift(), cfg.c_margin,
                 cfg.bisection_tol);
    if (cu.clamped) ++clamps;
    const double kappa = weighted_kappa(es.gamma, xs, i, cu.c);
    const double alpha_hat =
        update_alpha(es.gamma, xs, i, cu.c, kappa, cfg.bisection_tol);
    const double lambda_hat = update_lambda(alpha_hat, kappa);
    updated.emplace_back(alpha_hat, cu.c, lambda_hat);
  }
  return {GammaMixture(std::move(updated), tau), es.log_likelihood, clamps};
}

GammaMixture init_mixture(std::span<const double> xs, int n_states,
                          std::uint64_t seed) {
  if (n_states < 1) throw std::invalid_argument("init_mixture: n_states >= 1");
  const std::size_t n = xs.size();
  if (n < static_cast<std::size_t>(2 * n_states))
    throw TooFewSamplesError("init_mixture: need at least 2 samples per state");

  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double global_min = sorted.front();
  const double span = span_or_tiny(global_min, sorted.back());
  const double c_floor = global_min - 0.5 * span;

  // Contiguous quantile blocks; degenerate (zero variance) blocks merge into
  // their right neighbor (left for the last block).
  struct Block {
    std::size_t begin, end;
  };
  std::vector<Block> blocks;
  for (int j = 0; j < n_states; ++j) {
    const std::size_t b = j * n / n_states;
    const std::size_t e = (j + 1) * static_cast<std::size_t>(n) / n_states;
    if (e > b) blocks.push_back({b, e});
  }
  const auto block_variance = [&](const Block& blk) {
    return variance(std::span<const double>(sorted).subspan(
        blk.begin, blk.end - blk.begin));
  };
  bool merged = true;
  while (merged && blocks.size() > 1) {
    merged = false;
    for (std::size_t j = 0; j < blocks.size(); ++j) {
      if (block_variance(blocks[j]) > 0.0) continue;
      const std::size_t into = j + 1 < blocks.size() ? j + 1 : j - 1;
      blocks[into].begin = std::min(blocks[into].begin, blocks[j].begin);
      blocks[into].end = std::max(blocks[into].end, blocks[j].end);
      blocks.erase(blocks.begin() + static_cast<std::ptrdiff_t>(j));
      merged = true;
      break;
    }
  }
  if (blocks.size() == 1 && block_variance(blocks[0]) <= 0.0)
    throw FitError("init_mixture: data has zero variance");

  std::vector<ShiftedGamma> components;
  for (const Block& blk : blocks) {
    const auto view = std::span<const double>(sorted).subspan(
        blk.begin, blk.end - blk.begin);
    const double block_min = view.front();
    const double m = mean(view);
    const double var = variance(view);
    const double sd = std::sqrt(var);
    const double c0 = std::max(block_min - sd, c_floor);
    const double shifted_mean = m - c0;
    const double alpha0 = shifted_mean * shifted_mean / var;
    const double lambda0 = alpha0 / shifted_mean;
    components.emplace_back(alpha0, c0, lambda0);
  }

  // Merging can leave fewer blocks than states; pad with shifted copies so
  // the requested component count is preserved.
  Rng pad_rng(seed);
  while (components.size() < static_cast<std::size_t>(n_states)) {
    const ShiftedGamma& src = components[components.size() % blocks.size()];
    const double nudge = span * (0.02 + 0.02 * pad_rng.uniform01()) *
                         static_cast<double>(components.size() - blocks.size() + 1);
    components.emplace_back(src.alpha(), src.shift() - nudge, src.rate());
  }

  const std::vector<double> tau(components.size(),
                                1.0 / static_cast<double>(components.size()));
  return GammaMixture(std::move(components), tau);
}

double bic(double log_likelihood, int n_states, std::size_t n_samples) {
  const double k = 3.0 * n_states + (n_states - 1.0);
  return k * std::log(static_cast<double>(n_samples)) - 2.0 * log_likelihood;
}

namespace {

// Reseed a starved component near the data point the current model explains
// worst, then renormalize the weights.
GammaMixture rescue_component(const GammaMixture& m,
                              std::span<const double> xs, std::size_t starved) {
  std::size_t worst_t = 0;
  double worst_ll = kInf;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const double ll = m.log_pdf(xs[t]);
    if (ll < worst_ll) {
      worst_ll = ll;
      worst_t = t;
    }
  }
  const double x_star = xs[worst_t];
  const double sd = std::sqrt(variance(xs));
  const double h =
      std::max(sd / (2.0 * static_cast<double>(m.n_states())), 1e-9);

  std::vector<ShiftedGamma> components = m.components();
  std::vector<double> weights = m.weights();
  // alpha 4, sd h, mean at the worst-explained point.
  components[starved] = ShiftedGamma(4.0, x_star - 2.0 * h, 2.0 / h);
  const double target = 1.0 / static_cast<double>(m.n_states());
  double other_mass = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j)
    if (j != starved) other_mass += weights[j];
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (j == starved) {
      weights[j] = target;
    } else {
      weights[j] = other_mass > 0.0 ? weights[j] * (1.0 - target) / other_mass
                                    : (1.0 - target) / (weights.size() - 1);
    }
  }
  return GammaMixture(std::move(components), std::move(weights));
}

// Lowest column mass across states, with the column index.
std::pair<double, std::size_t> min_column_mass(const Responsibilities& r) {
  std::vector<double> col(r.n_states(), 0.0);
  for (std::size_t t = 0; t < r.n_samples(); ++t)
    for (std::size_t i = 0; i < r.n_states(); ++i) col[i] += r.at(t, i);
  std::size_t arg = 0;
  for (std::size_t i = 1; i < col.size(); ++i)
    if (col[i] < col[arg]) arg = i;
  return {col[arg], arg};
}

// If warm-phase updates pulled every shift above the full-data minimum,
// lower the smallest shift so the full data is covered again.
GammaMixture ensure_support(const GammaMixture& m, std::span<const double> xs,
                            double c_margin) {
  const auto [min_it, max_it] = std::minmax_element(xs.begin(), xs.end());
  const double x_min = *min_it;
  std::size_t lowest = 0;
  for (std::size_t i = 1; i < m.n_states(); ++i)
    if (m.component(i).shift() < m.component(lowest).shift()) lowest = i;
  if (m.component(lowest).shift() < x_min) return m;

  const double span = span_or_tiny(x_min, *max_it);
  std::vector<ShiftedGamma> components = m.components();
  const ShiftedGamma& g = components[lowest];
  components[lowest] =
      ShiftedGamma(g.alpha(), x_min - c_margin * span, g.rate());
  return GammaMixture(std::move(components), m.weights());
}

}  // namespace

FitReport fit(const ScoreSample& data, const FitConfig& cfg) {
  cfg.validate();
  data.validate();
  const std::size_t n = data.values.size();
  if (n < static_cast<std::size_t>(10 * cfg.n_states))
    throw TooFewSamplesError(
        "fit: need at least 10 samples per state, got " + std::to_string(n) +
        " for " + std::to_string(cfg.n_states) + " state(s)");

  const std::span<const double> full(data.values);
  std::vector<double> warm_values;
  bool use_warm = cfg.warm_start && cfg.warm_data_stride > 1;
  if (use_warm) {
    for (std::size_t t = 0; t < n;
         t += static_cast<std::size_t>(cfg.warm_data_stride))
      warm_values.push_back(data.values[t]);
    if (warm_values.size() < static_cast<std::size_t>(10 * cfg.n_states))
      use_warm = false;  // subsample too small to be useful
  }
  const int warm_budget =
      use_warm ? static_cast<int>(std::floor(cfg.warm_fraction_iters *
                                             cfg.max_iters))
               : 0;

  GammaMixture model = init_mixture(full, cfg.n_states, cfg.seed);

  std::vector<double> per_iter_ll;
  int iterations = 0;
  int warm_switch = 0;
  bool converged = false;
  int clamp_events = 0;
  int rescue_events = 0;
  const int rescue_cap = 3 * cfg.n_states;
  const double starve_threshold_factor = 1e-8;

  for (const bool warm_phase : {true, false}) {
    if (warm_phase && warm_budget == 0) continue;
    const std::span<const double> xs =
        warm_phase ? std::span<const double>(warm_values) : full;
    const int budget =
        warm_phase ? warm_budget : cfg.max_iters - iterations;
    if (!warm_phase) warm_switch = static_cast<int>(per_iter_ll.size());
    if (budget <= 0) continue;

    double prev_mean_ll = std::numeric_limits<double>::quiet_NaN();
    int steps = 0;
    while (true) {
      EStepResult es = e_step(model, xs);
      const double mean_ll =
          es.log_likelihood / static_cast<double>(xs.size());
      per_iter_ll.push_back(mean_ll);
      if (std::isfinite(prev_mean_ll) &&
          std::fabs(mean_ll - prev_mean_ll) <=
              cfg.rel_ll_tol * (1.0 + std::fabs(mean_ll))) {
        if (!warm_phase) converged = true;
        break;
      }
      if (steps >= budget) break;
      prev_mean_ll = mean_ll;

      const auto [min_mass, starved] = min_column_mass(es.gamma);
      if (min_mass < starve_threshold_factor * static_cast<double>(xs.size()) &&
          rescue_events < rescue_cap) {
        model = rescue_component(model, xs, starved);
        ++rescue_events;
        prev_mean_ll = std::numeric_limits<double>::quiet_NaN();
        continue;  // restart the iteration with fresh responsibilities
      }

      const std::vector<double> tau = update_tau(es.gamma);
      std::vector<ShiftedGamma> updated;
      updated.reserve(model.n_states());
      for (std::size_t i = 0; i < model.n_states(); ++i) {
        const ShiftedGamma& g = model.component(i);
        const CUpdateResult cu =
            update_c(es.gamma, xs, i, g.alpha(), g.rate(), g.shift(),
                     cfg.c_margin, cfg.bisection_tol);
        if (cu.clamped) ++clamp_events;
        const double kappa = weighted_kappa(es.gamma, xs, i, cu.c);
        const double alpha_hat =
            update_alpha(es.gamma, xs, i, cu.c, kappa, cfg.bisection_tol);
        updated.emplace_back(alpha_hat, cu.c, update_lambda(alpha_hat, kappa));
      }
      model = GammaMixture(std::move(updated), tau);
      ++iterations;
      ++steps;
    }

    if (warm_phase) model = ensure_support(model, full, cfg.c_margin);
  }

  const EStepResult final_es = e_step(model, full);

  FitReport report{model,
                   final_es.log_likelihood,
                   iterations,
                   converged,
                   model.mass_outside(),
                   std::move(per_iter_ll),
                   warm_switch,
                   clamp_events,
                   rescue_events,
                   n,
                   cfg};
  return report;
}

}  // namespace gammix
