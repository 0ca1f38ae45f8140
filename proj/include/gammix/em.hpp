#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gammix/mixture.hpp"

namespace gammix {

// A one-dimensional batch of similarity scores.  Bounds, when supplied,
// declare the validity interval of the data source (cosine scores would use
// (-1, 1)); construction rejects values outside them.
struct ScoreSample {
  std::vector<double> values;
  std::optional<std::pair<double, double>> bounds;

  // Throws std::invalid_argument on NaN/Inf or out-of-bounds values.
  void validate() const;
};

struct FitConfig {
  int n_states = 1;
  int max_iters = 200;
  double rel_ll_tol = 1e-8;
  bool warm_start = true;
  // Fraction of the iteration budget spent on the strided subsample.
  double warm_fraction_iters = 0.95;
  // Keep every stride-th value during the warm phase.
  int warm_data_stride = 20;
  double bisection_tol = 1e-10;
  // The shift stays below the smallest covered sample by this fraction of
  // the sample span.
  double c_margin = 1e-6;
  std::uint64_t seed = 1;

  void validate() const;
};

// Posterior state probabilities, row-major (sample t, state i); rows sum
// to 1.
class Responsibilities {
 public:
  Responsibilities(std::size_t n_samples, std::size_t n_states)
      : n_samples_(n_samples), n_states_(n_states),
        gamma_(n_samples * n_states, 0.0) {}

  std::size_t n_samples() const { return n_samples_; }
  std::size_t n_states() const { return n_states_; }
  double& at(std::size_t t, std::size_t i) { return gamma_[t * n_states_ + i]; }
  double at(std::size_t t, std::size_t i) const {
    return gamma_[t * n_states_ + i];
  }
  std::span<const double> row(std::size_t t) const {
    return {gamma_.data() + t * n_states_, n_states_};
  }

 private:
  std::size_t n_samples_;
  std::size_t n_states_;
  std::vector<double> gamma_;
};

struct FitReport {
  GammaMixture model;
  // Total log-likelihood of the full data under `model`.
  double log_likelihood = 0.0;
  int iterations_run = 0;
  bool converged = false;
  double mass_outside = 0.0;
  // Mean log-likelihood per sample before each update, nondecreasing within
  // each data regime (warm subsample, then full data).
  std::vector<double> per_iter_ll;
  // First iteration index evaluated on the full data (0 when no warm phase).
  int warm_switch_iter = 0;
  // Times the shift update hit its bracket edge and was clamped.
  int c_clamp_events = 0;
  // Times a starved component was reseeded.
  int rescue_events = 0;
  std::size_t n_samples = 0;
  FitConfig config;
};

struct EStepResult {
  Responsibilities gamma;
  double log_likelihood;  // total over the supplied data
};

// E-step: gamma_{t,i} proportional to tau_i pdf_i(x_t), rows normalized in
// log space.  Throws FitError naming the sample index if some x_t is below
// every component's support.
EStepResult e_step(const GammaMixture& m, std::span<const double> xs);

// tau_i = (sum_t gamma_{t,i}) / (sum over everything).
std::vector<double> update_tau(const Responsibilities& r);

// Inverse of the responsibility-weighted mean of x_t - c_i.
double weighted_kappa(const Responsibilities& r, std::span<const double> xs,
                      std::size_t i, double c_i);

// Root of the profile score in alpha (strictly decreasing), bracketed by
// doubling outward from alpha = 1 within [1e-6, 1e6], then bisected.
double update_alpha(const Responsibilities& r, std::span<const double> xs,
                    std::size_t i, double c_i, double kappa_i,
                    double bisection_tol);

inline double update_lambda(double alpha_hat, double kappa_i) {
  return alpha_hat * kappa_i;
}

struct CUpdateResult {
  double c;
  bool clamped = false;
};

// Root of the score in c on the bracket below the smallest covered sample.
// For alpha <= 1 the score is monotone in the wrong direction and the update
// is skipped (current value is returned).
CUpdateResult update_c(const Responsibilities& r, std::span<const double> xs,
                       std::size_t i, double alpha_i, double lambda_i,
                       double current_c, double c_margin, double bisection_tol);

struct EmStepResult {
  GammaMixture model;
  // Log-likelihood of the *input* model on xs (the value the step improves).
  double log_likelihood_before;
  int c_clamp_events = 0;
};

// One full cycle: E-step, tau, then per state c -> kappa -> alpha -> lambda.
EmStepResult em_step(const GammaMixture& m, std::span<const double> xs,
                     const FitConfig& cfg);

// Quantile-block method-of-moments initializer; deterministic given data.
// The seed only perturbs the padding used when degenerate blocks collapse.
GammaMixture init_mixture(std::span<const double> xs, int n_states,
                          std::uint64_t seed);

// Full fitting loop with the warm-start schedule.
FitReport fit(const ScoreSample& data, const FitConfig& cfg);

// k ln n - 2 LL with k = 3 s + (s - 1) free parameters.
double bic(double log_likelihood, int n_states, std::size_t n_samples);

}  // namespace gammix
