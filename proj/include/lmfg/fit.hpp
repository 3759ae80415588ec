#pragma once

#include <span>

namespace lmfg {

/// Least-squares line y = slope x + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square residual
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);
/// Fit of log y against log x.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

}  // namespace lmfg
