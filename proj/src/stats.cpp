#include "gammix/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace gammix {

namespace {

constexpr std::size_t kPairwiseBlock = 128;

}  // namespace

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= kPairwiseBlock) {
    double sum = 0.0;
    for (const double v : values) sum += v;
    return sum;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::domain_error("mean: empty input");
  return pairwise_sum(values) / static_cast<double>(values.size());
}

double variance(std::span<const double> values) {
  if (values.empty()) throw std::domain_error("variance: empty input");
  const double m = mean(values);
  double sum = 0.0;
  for (const double v : values) {
    const double d = v - m;
    sum += d * d;
  }
  return sum / static_cast<double>(values.size());
}

double skewness(std::span<const double> values) {
  if (values.size() < 3)
    throw std::domain_error("skewness: need at least 3 samples");
  const double m = mean(values);
  double m2 = 0.0, m3 = 0.0;
  for (const double v : values) {
    const double d = v - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  const double n = static_cast<double>(values.size());
  m2 /= n;
  m3 /= n;
  if (!(m2 > 0.0)) throw std::domain_error("skewness: zero variance");
  return m3 / (m2 * std::sqrt(m2));
}

}  // namespace gammix
