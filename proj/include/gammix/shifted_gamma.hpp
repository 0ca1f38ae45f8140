#pragma once

#include <cstdint>
#include <vector>

#include "gammix/rng.hpp"

namespace gammix {

// Gamma density translated by a shift c, supported on x > c:
//   pdf(x) = (x-c)^(alpha-1) exp(-lambda (x-c)) lambda^alpha / Gamma(alpha).
// Immutable after construction; the log normalizer is cached so log_pdf is
// cheap inside the fitter's inner loops.
class ShiftedGamma {
 public:
  ShiftedGamma(double alpha, double shift, double rate);

  double alpha() const { return alpha_; }
  double shift() const { return shift_; }
  double rate() const { return rate_; }

  // Log density; -inf for x <= shift.
  double log_pdf(double x) const;
  double cdf(double x) const;
  // Right tail, computed from the upper incomplete gamma directly.
  double sf(double x) const;
  double mean() const { return shift_ + alpha_ / rate_; }
  double variance() const { return alpha_ / (rate_ * rate_); }

  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;
  double sample_one(Rng& rng) const;

  // alpha*ln(rate) - lnGamma(alpha), the cached normalizer.
  double log_norm() const { return log_norm_; }

 private:
  double alpha_;
  double shift_;
  double rate_;
  double log_norm_;
};

}  // namespace gammix
