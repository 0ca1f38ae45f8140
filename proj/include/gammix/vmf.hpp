#pragma once

#include <cstdint>
#include <vector>

namespace gammix {

// Density of the cosine similarity t = mu . x when x follows a von
// Mises-Fisher distribution with concentration kappa in dimension dim:
//   g(t) proportional to (1 - t^2)^((dim-3)/2) exp(kappa t),  t in [-1, 1].
// The normalizer is computed once by adaptive quadrature (in the angle
// variable, which removes the endpoint singularity for dim < 3) and cached.
class VmfCosine {
 public:
  VmfCosine(int dim, double kappa);

  int dim() const { return dim_; }
  double kappa() const { return kappa_; }

  // Normalized log density; throws std::domain_error for |t| > 1.
  double log_pdf(double t) const;

  // Rejection sampling under a flat envelope; requires dim >= 3 so the
  // density is bounded.
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

  // Location of the density maximum on [-1, 1].
  double mode() const { return mode_; }

 private:
  int dim_;
  double kappa_;
  double log_norm_;      // ln of the [-1,1] integral of the unnormalized pdf
  double mode_;
  double max_log_pdf_;
};

}  // namespace gammix
