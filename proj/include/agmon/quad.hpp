#pragma once

#include <cmath>
#include <functional>

#include "agmon/errors.hpp"

namespace agmon {

/// Adaptive Gauss-Legendre integration on [a,b], relative tolerance `tol`.
/// Recursion depth is capped; hitting the cap raises numeric_error so a
/// non-decaying integrand fails loudly instead of looping.
double adaptive_gl(const std::function<double(double)>& f, double a, double b,
                   double tol, int max_depth = 42);

/// Integral over [0, 2pi) of a smooth periodic function by trapezoid panel
/// doubling (spectrally accurate for periodic integrands).
double periodic_integrate(const std::function<double(double)>& f, double tol);

} // namespace agmon
