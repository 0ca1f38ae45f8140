#include "gammix/shifted_gamma.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gammix/special_functions.hpp"

namespace gammix {

ShiftedGamma::ShiftedGamma(double alpha, double shift, double rate)
    : alpha_(alpha), shift_(shift), rate_(rate) {
  if (!(alpha > 0.0))
    throw std::domain_error("ShiftedGamma: alpha must be > 0");
  if (!(rate > 0.0)) throw std::domain_error("ShiftedGamma: rate must be > 0");
  if (!std::isfinite(shift))
    throw std::domain_error("ShiftedGamma: shift must be finite");
  log_norm_ = alpha_ * std::log(rate_) - sf::log_gamma(alpha_);
}

double ShiftedGamma::log_pdf(double x) const {
  const double z = x - shift_;
  if (!(z > 0.0)) return -std::numeric_limits<double>::infinity();
  return (alpha_ - 1.0) * std::log(z) - rate_ * z + log_norm_;
}

double ShiftedGamma::cdf(double x) const {
  const double z = x - shift_;
  if (!(z > 0.0)) return 0.0;
  return sf::reg_lower_inc_gamma(alpha_, rate_ * z);
}

double ShiftedGamma::sf(double x) const {
  const double z = x - shift_;
  if (!(z > 0.0)) return 1.0;
  return sf::reg_upper_inc_gamma(alpha_, rate_ * z);
}

double ShiftedGamma::sample_one(Rng& rng) const {
  return shift_ + rng.gamma(alpha_) / rate_;
}

std::vector<double> ShiftedGamma::sample(std::size_t n,
                                         std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_one(rng));
  return out;
}

}  // namespace gammix
