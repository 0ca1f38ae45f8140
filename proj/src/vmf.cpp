#include "gammix/vmf.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gammix/quadrature.hpp"
#include "gammix/rng.hpp"

namespace gammix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double unnormalized_log_pdf(int dim, double kappa, double t) {
  const double one_minus_t2 = (1.0 - t) * (1.0 + t);
  if (dim == 3) return kappa * t;
  if (one_minus_t2 <= 0.0) return dim > 3 ? -kInf : kInf;
  return 0.5 * (dim - 3) * std::log(one_minus_t2) + kappa * t;
}

}  // namespace

VmfCosine::VmfCosine(int dim, double kappa) : dim_(dim), kappa_(kappa) {
  if (dim < 2) throw std::domain_error("VmfCosine: dim must be >= 2");
  if (!(kappa >= 0.0)) throw std::domain_error("VmfCosine: kappa must be >= 0");

  // Golden-section maximum of the unnormalized log density (log-concave in t
  // for dim >= 3; for dim < 3 the sup sits at the boundary and sampling is
  // disabled).
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = -1.0, b = 1.0;
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = unnormalized_log_pdf(dim_, kappa_, x1);
  double f2 = unnormalized_log_pdf(dim_, kappa_, x2);
  for (int i = 0; i < 200 && b - a > 1e-14; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = unnormalized_log_pdf(dim_, kappa_, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = unnormalized_log_pdf(dim_, kappa_, x1);
    }
  }
  mode_ = 0.5 * (a + b);
  // Endpoints can beat the interior scan when d <= 3.
  for (const double t : {-1.0, 1.0}) {
    if (unnormalized_log_pdf(dim_, kappa_, t) >
        unnormalized_log_pdf(dim_, kappa_, mode_))
      mode_ = t;
  }

  // Z = int_{-1}^{1} (1-t^2)^((d-3)/2) e^{kappa t} dt.  With t = sin(theta)
  // the integrand exp(g), g = (d-2) ln cos(theta) + kappa sin(theta), is
  // smooth for every d >= 2.  For large d or kappa it is a narrow spike, so
  // peel off the peak value (the quadrature tolerance is absolute) and split
  // the interval there: the recursion then refines toward the spike instead
  // of stepping over it.
  const double half_pi = std::numbers::pi / 2.0;
  const auto g = [this](double theta) {
    const double c = std::cos(theta);
    if (dim_ == 2) return kappa_ * std::sin(theta);
    if (c <= 0.0) return -kInf;
    return (dim_ - 2) * std::log(c) + kappa_ * std::sin(theta);
  };
  // The theta-space peak is NOT asin(mode_): the cos(theta) jacobian kills
  // the boundary, so when the t-mode sits at +-1 (d <= 3) that point is a
  // minimum of g.  g' has a single interior zero for d >= 3 and g is
  // monotone for d == 2, so a second golden section finds the split point.
  double ta = -half_pi, tb = half_pi;
  double t1 = tb - gr * (tb - ta);
  double t2 = ta + gr * (tb - ta);
  double g1 = g(t1);
  double g2 = g(t2);
  for (int i = 0; i < 200 && tb - ta > 1e-12; ++i) {
    if (g1 < g2) {
      ta = t1;
      t1 = t2;
      g1 = g2;
      t2 = ta + gr * (tb - ta);
      g2 = g(t2);
    } else {
      tb = t2;
      t2 = t1;
      g2 = g1;
      t1 = tb - gr * (tb - ta);
      g1 = g(t1);
    }
  }
  const double theta_split = 0.5 * (ta + tb);
  const double g_peak = g(theta_split);
  const auto scaled = [&](double theta) { return std::exp(g(theta) - g_peak); };
  const double mass = adaptive_simpson(scaled, -half_pi, theta_split, 1e-13) +
                      adaptive_simpson(scaled, theta_split, half_pi, 1e-13);
  log_norm_ = g_peak + std::log(mass);

  max_log_pdf_ = unnormalized_log_pdf(dim_, kappa_, mode_) - log_norm_;
}

double VmfCosine::log_pdf(double t) const {
  if (!(t >= -1.0 && t <= 1.0))
    throw std::domain_error("VmfCosine::log_pdf: t must be in [-1,1]");
  return unnormalized_log_pdf(dim_, kappa_, t) - log_norm_;
}

std::vector<double> VmfCosine::sample(std::size_t n,
                                      std::uint64_t seed) const {
  if (dim_ < 3)
    throw std::domain_error(
        "VmfCosine::sample: density is unbounded for dim < 3");
  const double log_envelope = max_log_pdf_ + 1e-9;
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n);
  while (out.size() < n) {
    const double t = rng.uniform(-1.0, 1.0);
    const double u = 1.0 - rng.uniform01();  // (0, 1]
    if (std::log(u) + log_envelope <= log_pdf(t)) out.push_back(t);
  }
  return out;
}

}  // namespace gammix
