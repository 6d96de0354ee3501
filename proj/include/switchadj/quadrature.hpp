#pragma once

#include <functional>

namespace switchadj {

struct quadrature_options {
  double abs_tolerance = 1e-3;
  int max_depth = 50;
};

/// Adaptive Simpson quadrature of f on [a, b] with Richardson correction.
/// Throws quadrature_error when the recursion depth is exhausted before the
/// local error estimate meets its share of the tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        quadrature_options options = {});

}  // namespace switchadj
