#pragma once

#include <functional>

namespace preytaxis {

/// Adaptive Simpson quadrature of f over [a, b] (b < a gives the signed integral).
/// Recursion stops when the Richardson error estimate is below tol or at max_depth.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 50);

}  // namespace preytaxis
