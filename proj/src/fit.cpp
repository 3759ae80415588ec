#include "lmfg/fit.hpp"

#include "lmfg/core.hpp"

#include <Eigen/Dense>

#include <vector>

namespace lmfg {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ContractViolation("fit_line: need at least two paired samples");
  const Index n = static_cast<Index>(x.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Index i = 0; i < n; ++i) {
    a(i, 0) = x[i];
    a(i, 1) = 1.0;
    b[i] = y[i];
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
  LineFit f;
  f.slope = c[0];
  f.intercept = c[1];
  f.residual = std::sqrt((a * c - b).squaredNorm() / n);
  return f;
}

LineFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ContractViolation("fit_loglog: samples must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly);
}

}  // namespace lmfg
