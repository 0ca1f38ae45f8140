#include "gammix/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace gammix {

namespace {

constexpr double kWeightSumTol = 1e-12;

}  // namespace

GammaMixture::GammaMixture(std::vector<ShiftedGamma> components,
                           std::vector<double> weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
  if (components_.empty())
    throw std::invalid_argument("GammaMixture: no components");
  if (components_.size() != weights_.size())
    throw std::invalid_argument(
        "GammaMixture: components/weights length mismatch");
  double sum = 0.0;
  for (const double w : weights_) {
    if (!(w >= 0.0))
      throw std::invalid_argument("GammaMixture: negative weight");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > kWeightSumTol)
    throw std::invalid_argument("GammaMixture: weights must sum to 1");
  for (double& w : weights_) w /= sum;

  // Canonical order: ascending mean, then shift/alpha/rate as tie-breaks.
  std::vector<std::size_t> order(components_.size());
  std::iota(order.begin(), order.end(), 0);
  auto key = [this](std::size_t i) {
    const ShiftedGamma& g = components_[i];
    return std::make_tuple(g.mean(), g.shift(), g.alpha(), g.rate());
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  std::vector<ShiftedGamma> sorted_components;
  std::vector<double> sorted_weights;
  sorted_components.reserve(order.size());
  sorted_weights.reserve(order.size());
  for (const std::size_t i : order) {
    sorted_components.push_back(components_[i]);
    sorted_weights.push_back(weights_[i]);
  }
  components_ = std::move(sorted_components);
  weights_ = std::move(sorted_weights);
}

GammaMixture::GammaMixture(ShiftedGamma component)
    : GammaMixture(std::vector<ShiftedGamma>{std::move(component)},
                   std::vector<double>{1.0}) {}

double GammaMixture::log_pdf(double x) const {
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(components_.size());
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const double t = weights_[i] > 0.0
                         ? std::log(weights_[i]) + components_[i].log_pdf(x)
                         : -std::numeric_limits<double>::infinity();
    terms[i] = t;
    max_term = std::max(max_term, t);
  }
  if (!std::isfinite(max_term)) return max_term;
  double sum = 0.0;
  for (const double t : terms) sum += std::exp(t - max_term);
  return max_term + std::log(sum);
}

double GammaMixture::cdf(double x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i)
    acc += weights_[i] * components_[i].cdf(x);
  return acc;
}

double GammaMixture::sf(double x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i)
    acc += weights_[i] * components_[i].sf(x);
  return acc;
}

double GammaMixture::mean() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i)
    acc += weights_[i] * components_[i].mean();
  return acc;
}

double GammaMixture::mass_outside() const { return cdf(-1.0) + sf(1.0); }

double GammaMixture::sample_one(Rng& rng) const {
  const double u = rng.uniform01();
  double acc = 0.0;
  std::size_t pick = components_.size() - 1;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    acc += weights_[i];
    if (u < acc) {
      pick = i;
      break;
    }
  }
  return components_[pick].sample_one(rng);
}

std::vector<double> GammaMixture::sample(std::size_t n,
                                         std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_one(rng));
  return out;
}

}  // namespace gammix
