#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace lmfg::quad {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point rule (Newton iteration on P_n).
const GaussRule& gauss_legendre(int n);

/// Single-panel Gauss integral of f over [a, b]. Works for any return type
/// closed under addition and scaling by double.
template <class F>
auto panel(F&& f, double a, double b, int n = 16) {
  const auto& rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  auto sum = f(mid + half * rule.nodes[0]) * rule.weights[0];
  for (int i = 1; i < n; ++i) sum += f(mid + half * rule.nodes[i]) * rule.weights[i];
  return sum * half;
}

/// Composite Gauss over [a, b] with panels no wider than `max_width`.
template <class F>
auto composite(F&& f, double a, double b, double max_width, int n = 16) {
  const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_width)));
  const double w = (b - a) / panels;
  auto sum = panel(f, a, a + w, n);
  for (int p = 1; p < panels; ++p) sum += panel(f, a + p * w, a + (p + 1) * w, n);
  return sum;
}

}  // namespace lmfg::quad
