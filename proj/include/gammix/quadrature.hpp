#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace gammix {

// Adaptive Simpson with Richardson correction.  Used for one-off
// normalization constants, not in fitting hot paths.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 60);

}  // namespace gammix
