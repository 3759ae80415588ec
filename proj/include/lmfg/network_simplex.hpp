#pragma once

#include <vector>

namespace lmfg {

/// Uncapacitated minimum-cost flow with real supplies, solved by the primal
/// network simplex method (big-M artificial root, block pricing).
class NetworkSimplex {
public:
  explicit NetworkSimplex(int nodes) : supply_(nodes, 0.0) {}

  /// Directed arc tail -> head with nonnegative cost; returns its index.
  int add_arc(int tail, int head, double cost);
  void set_supply(int node, double s) { supply_.at(node) = s; }

  /// Solves; throws std::runtime_error if the network is infeasible.
  void solve();

  double total_cost() const { return cost_; }
  /// Dual potentials y with y_tail - y_head <= cost on every arc, tight on
  /// arcs carrying flow; the objective equals sum_i supply_i y_i.
  const std::vector<double>& potentials() const { return potential_; }
  double flow(int arc) const { return flow_.at(arc); }
  int pivots() const { return pivots_; }

private:
  struct Arc {
    int tail, head;
    double cost;
  };
  std::vector<double> supply_;
  std::vector<Arc> arcs_;
  std::vector<double> flow_;
  std::vector<double> potential_;
  double cost_ = 0.0;
  int pivots_ = 0;
};

/// Dense simplex (Bland's rule) for max c^T x, A x <= b, x >= 0 with b >= 0.
/// Intended for small instances only.
std::vector<double> dense_simplex_max(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                                      const std::vector<double>& c, double* objective = nullptr);

}  // namespace lmfg
