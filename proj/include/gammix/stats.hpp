#pragma once

#include <cstddef>
#include <span>

namespace gammix {

// Fixed-shape pairwise (tree) summation.  Error grows like eps*log2(n)
// instead of eps*n, and the reduction order is independent of how the data
// was produced, which the permutation-invariance contract of the fitter
// relies on.
double pairwise_sum(std::span<const double> values);

double mean(std::span<const double> values);
// Population variance (divide by n).
double variance(std::span<const double> values);

// Standardized third central moment.  Requires >= 3 samples and nonzero
// variance; throws std::domain_error otherwise.
double skewness(std::span<const double> values);

}  // namespace gammix
