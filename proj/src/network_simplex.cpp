#include "lmfg/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lmfg {

int NetworkSimplex::add_arc(int tail, int head, double cost) {
  const int n = static_cast<int>(supply_.size());
  if (tail < 0 || tail >= n || head < 0 || head >= n || tail == head) throw std::invalid_argument("network simplex: bad arc");
  if (!(cost >= 0.0)) throw std::invalid_argument("network simplex: arc costs must be nonnegative");
  arcs_.push_back({tail, head, cost});
  return static_cast<int>(arcs_.size()) - 1;
}

void NetworkSimplex::solve() {
  const int n = static_cast<int>(supply_.size());
  const int root = n;
  const int m_real = static_cast<int>(arcs_.size());
  double total = 0.0, cmax = 1.0, smax = 0.0;
  for (double s : supply_) {
    total += s;
    smax = std::max(smax, std::abs(s));
  }
  for (const auto& a : arcs_) cmax = std::max(cmax, a.cost);
  if (std::abs(total) > 1e-9 * std::max(1.0, smax * n)) throw std::runtime_error("network simplex: supplies do not balance");
  const double big_m = 2.0 * (n + 1) * cmax + 1.0;

  // Arcs 0..m_real-1 are real; arcs m_real + i are artificial for node i.
  std::vector<Arc> arcs = arcs_;
  std::vector<double> flow(m_real + n, 0.0);
  std::vector<int> parent(n + 1, -1), pred(n + 1, -1), depth(n + 1, 0);
  std::vector<double> y(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    if (supply_[i] >= 0.0)
      arcs.push_back({i, root, big_m});
    else
      arcs.push_back({root, i, big_m});
    flow[m_real + i] = std::abs(supply_[i]);
    parent[i] = root;
    pred[i] = m_real + i;
  }
  const int m = static_cast<int>(arcs.size());

  // Recomputes depth and potentials from parent pointers, O(n).
  std::vector<char> done(n + 1, 0);
  std::vector<int> stack;
  auto refresh = [&]() {
    std::fill(done.begin(), done.end(), 0);
    done[root] = 1;
    depth[root] = 0;
    y[root] = 0.0;
    for (int v = 0; v < n; ++v) {
      int w = v;
      stack.clear();
      while (!done[w]) {
        stack.push_back(w);
        w = parent[w];
      }
      for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
        const int u = *it;
        const Arc& a = arcs[pred[u]];
        depth[u] = depth[parent[u]] + 1;
        // tight: cost - y_tail + y_head = 0
        y[u] = a.tail == u ? a.cost + y[parent[u]] : y[parent[u]] - a.cost;
        done[u] = 1;
      }
    }
  };
  refresh();

  const int block = std::max(64, static_cast<int>(std::sqrt(static_cast<double>(m))));
  const double eps = 1e-12 * std::max(1.0, cmax);
  int next = 0;
  std::vector<int> up_side, down_side;
  pivots_ = 0;
  const long max_pivots = 50L * (n + 1) * 50 + 1000000;
  while (true) {
    // Block pricing: most negative reduced cost within the first block that has one.
    int enter = -1;
    double best = -eps;
    int scanned = 0;
    while (scanned < m) {
      const int stop = std::min(m, scanned + block);
      for (; scanned < stop; ++scanned) {
        const int e = (next + scanned) % m;
        const Arc& a = arcs[e];
        const double rc = a.cost - y[a.tail] + y[a.head];
        if (rc < best) {
          best = rc;
          enter = e;
        }
      }
      if (enter >= 0) break;
    }
    if (enter < 0) break;
    next = (next + scanned) % m;
    if (++pivots_ > max_pivots) throw std::runtime_error("network simplex: pivot limit reached");

    // Cycle: push along enter (u -> v), then from v up to the join and down to u.
    const int u = arcs[enter].tail, v = arcs[enter].head;
    up_side.clear();
    down_side.clear();
    int a = v, b = u;
    while (a != b) {
      if (depth[a] >= depth[b]) {
        up_side.push_back(a);
        a = parent[a];
      } else {
        down_side.push_back(b);
        b = parent[b];
      }
    }
    // Order along the cycle starting at the join: join -> ... -> u, enter, v -> ... -> join.
    std::reverse(down_side.begin(), down_side.end());
    double delta = std::numeric_limits<double>::infinity();
    int leave_node = -1;
    // down side: traversed parent -> child; the arc decreases if it points child -> parent.
    for (int w : down_side) {
      if (arcs[pred[w]].tail == w && flow[pred[w]] <= delta) {
        delta = flow[pred[w]];
        leave_node = w;
      }
    }
    // up side: traversed child -> parent; decreases if it points parent -> child.
    for (int w : up_side) {
      if (arcs[pred[w]].head == w && flow[pred[w]] <= delta) {
        delta = flow[pred[w]];
        leave_node = w;
      }
    }
    if (leave_node < 0) throw std::runtime_error("network simplex: unbounded (negative cycle)");
    flow[enter] += delta;
    for (int w : down_side) flow[pred[w]] += (arcs[pred[w]].tail == w ? -delta : delta);
    for (int w : up_side) flow[pred[w]] += (arcs[pred[w]].head == w ? -delta : delta);

    // Re-hang the subtree cut off below leave_node onto the entering arc.
    const bool on_up_side = std::find(up_side.begin(), up_side.end(), leave_node) != up_side.end();
    const int inside = on_up_side ? v : u;  // entering endpoint inside the detached subtree
    const int outside = on_up_side ? u : v;
    int w = inside, new_parent = outside, new_pred = enter;
    while (true) {
      const int old_parent = parent[w], old_pred = pred[w];
      parent[w] = new_parent;
      pred[w] = new_pred;
      if (w == leave_node) break;
      new_parent = w;
      new_pred = old_pred;
      w = old_parent;
    }
    refresh();
  }

  for (int i = 0; i < n; ++i)
    if (flow[m_real + i] > 1e-9 * std::max(1.0, smax)) throw std::runtime_error("network simplex: infeasible network");
  flow_.assign(flow.begin(), flow.begin() + m_real);
  potential_.assign(y.begin(), y.begin() + n);
  cost_ = 0.0;
  for (int e = 0; e < m_real; ++e) cost_ += flow_[e] * arcs_[e].cost;
}

std::vector<double> dense_simplex_max(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                                      const std::vector<double>& c, double* objective) {
  const int rows = static_cast<int>(A.size());
  const int cols = static_cast<int>(c.size());
  // Tableau with slack columns; basis starts at the slacks.
  const int width = cols + rows + 1;
  std::vector<double> t(static_cast<std::size_t>(rows + 1) * width, 0.0);
  auto at = [&](int r, int k) -> double& { return t[static_cast<std::size_t>(r) * width + k]; };
  std::vector<int> basis(rows);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(A[r].size()) != cols || b[r] < 0.0) throw std::invalid_argument("dense simplex: bad row");
    for (int k = 0; k < cols; ++k) at(r, k) = A[r][k];
    at(r, cols + r) = 1.0;
    at(r, width - 1) = b[r];
    basis[r] = cols + r;
  }
  for (int k = 0; k < cols; ++k) at(rows, k) = -c[k];
  const double eps = 1e-12;
  for (int iter = 0; iter < 100000; ++iter) {
    int enter = -1;
    for (int k = 0; k < width - 1; ++k)
      if (at(rows, k) < -eps) {
        enter = k;  // Bland: smallest index
        break;
      }
    if (enter < 0) break;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < rows; ++r) {
      if (at(r, enter) > eps) {
        const double ratio = at(r, width - 1) / at(r, enter);
        if (ratio < best - eps || (std::abs(ratio - best) <= eps && leave >= 0 && basis[r] < basis[leave])) {
          best = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0) throw std::runtime_error("dense simplex: unbounded");
    const double piv = at(leave, enter);
    for (int k = 0; k < width; ++k) at(leave, k) /= piv;
    for (int r = 0; r <= rows; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      for (int k = 0; k < width; ++k) at(r, k) -= f * at(leave, k);
    }
    basis[leave] = enter;
  }
  std::vector<double> x(cols, 0.0);
  for (int r = 0; r < rows; ++r)
    if (basis[r] < cols) x[basis[r]] = at(r, width - 1);
  if (objective) *objective = at(rows, width - 1);
  return x;
}

}  // namespace lmfg
