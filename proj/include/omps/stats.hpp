#pragma once

#include <span>

namespace omps {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Least-squares line through (xs, ys).
LineFit fit_line(std::span<const double> xs, std::span<const double> ys);

// Slope of log(ys) against log(xs).
double loglog_slope(std::span<const double> xs, std::span<const double> ys);

}  // namespace omps
