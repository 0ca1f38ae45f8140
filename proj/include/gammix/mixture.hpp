#pragma once

#include <cstdint>
#include <vector>

#include "gammix/shifted_gamma.hpp"

namespace gammix {

// Convex combination of shifted gamma components.  Components are kept in
// canonical order (ascending mean) so serialized models and test expectations
// are reproducible; the likelihood itself is permutation invariant.
class GammaMixture {
 public:
  GammaMixture(std::vector<ShiftedGamma> components,
               std::vector<double> weights);

  // Convenience single-component mixture.
  explicit GammaMixture(ShiftedGamma component);

  std::size_t n_states() const { return components_.size(); }
  const ShiftedGamma& component(std::size_t i) const { return components_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<ShiftedGamma>& components() const { return components_; }
  const std::vector<double>& weights() const { return weights_; }

  // log sum_i tau_i pdf_i(x), max-subtracted; -inf iff x is below every
  // component's support.
  double log_pdf(double x) const;
  double cdf(double x) const;
  // Right tail as the weighted sum of component upper tails, not 1 - cdf.
  double sf(double x) const;
  double mean() const;

  // Mass the untruncated model places outside [-1, 1]; reported as a fit
  // diagnostic.
  double mass_outside() const;

  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;
  double sample_one(Rng& rng) const;

 private:
  std::vector<ShiftedGamma> components_;
  std::vector<double> weights_;
};

}  // namespace gammix
