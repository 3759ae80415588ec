#include "lmfg/metrics.hpp"

#include "lmfg/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace lmfg {

namespace {

double wrap_delta(double d, double period) {
  if (period <= 0.0) return d;
  d = std::fmod(std::abs(d), period);
  return std::min(d, period - d);
}

/// Supplies mu - nu on a shared support, with shape checks.
RealArray difference(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.size() != nu.size() || mu.dim() != nu.dim() || mu.period != nu.period)
    throw ContractViolation("d0: measures live on different spaces");
  if (mu.points.size() > 0 && !(mu.points.array() == nu.points.array()).all())
    throw ContractViolation("d0: measures must share their support point list");
  return mu.weights - nu.weights;
}

struct FlowOutcome {
  double value;
  RealArray f;  // potentials relative to the ground node, size n
};

/// Min-cost flow over a sparse graph plus a ground node joined to every point
/// at cost 1 in both directions (the |f| <= 1 constraint).
FlowOutcome ground_flow(const RealArray& s, const std::vector<std::tuple<int, int, double>>& edges) {
  const int n = static_cast<int>(s.size());
  NetworkSimplex ns(n + 1);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    ns.set_supply(i, s[i]);
    total += s[i];
  }
  ns.set_supply(n, -total);
  for (const auto& [a, b, c] : edges) {
    if (c >= 2.0) continue;  // never cheaper than a detour through the ground
    ns.add_arc(a, b, c);
    ns.add_arc(b, a, c);
  }
  for (int i = 0; i < n; ++i) {
    ns.add_arc(i, n, 1.0);
    ns.add_arc(n, i, 1.0);
  }
  try {
    ns.solve();
  } catch (const std::runtime_error& e) {
    throw std::logic_error(std::string("d0 LP failed internally: ") + e.what());
  }
  FlowOutcome out{ns.total_cost(), RealArray(n)};
  const auto& y = ns.potentials();
  const double yg = y[n];
  for (int i = 0; i < n; ++i) out.f[i] = std::clamp(y[i] - yg, -1.0, 1.0);
  return out;
}

/// Exact LP for a general point cloud; arcs are chosen so that shortest paths
/// reproduce min(distance, 2) between every pair that matters.
FlowOutcome exact_flow(const DiscreteMeasure& mu, const RealArray& s) {
  const int n = static_cast<int>(s.size());
  std::vector<std::tuple<int, int, double>> edges;
  if (mu.dim() == 1) {
    // Path metric of a line (or circle): neighbours suffice.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return mu.points(a, 0) < mu.points(b, 0); });
    for (int k = 0; k + 1 < n; ++k) edges.emplace_back(order[k], order[k + 1], mu.distance(order[k], order[k + 1]));
    if (!mu.period.empty() && n > 2) {
      const double gap = mu.period[0] - (mu.points(order[n - 1], 0) - mu.points(order[0], 0));
      edges.emplace_back(order[n - 1], order[0], std::max(gap, 0.0));
    }
    return ground_flow(s, edges);
  }
  if (n <= 400) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j, mu.distance(i, j));
    return ground_flow(s, edges);
  }
  // Large clouds: only sources and sinks need to be linked.
  std::vector<int> pos, neg;
  for (int i = 0; i < n; ++i) {
    if (s[i] > 0.0) pos.push_back(i);
    if (s[i] < 0.0) neg.push_back(i);
  }
  NetworkSimplex ns(n + 1);
  for (int i = 0; i < n; ++i) ns.set_supply(i, s[i]);
  ns.set_supply(n, -s.sum());
  for (int i : pos)
    for (int j : neg) {
      const double c = mu.distance(i, j);
      if (c < 2.0) ns.add_arc(i, j, c);
    }
  for (int i : pos) ns.add_arc(i, n, 1.0);
  for (int j : neg) ns.add_arc(n, j, 1.0);
  for (int i = 0; i < n; ++i)
    if (s[i] == 0.0) ns.add_arc(i, n, 1.0);
  ns.solve();
  // Certificate: restrict to supported nodes, then McShane extension and clamp.
  const auto& y = ns.potentials();
  std::vector<int> active(pos);
  active.insert(active.end(), neg.begin(), neg.end());
  RealArray f(n);
  for (int i = 0; i < n; ++i) {
    double best = 1.0;
    for (int k : active) best = std::min(best, (y[k] - y[n]) + mu.distance(i, k));
    f[i] = std::clamp(best, -1.0, 1.0);
  }
  return {ns.total_cost(), f};
}

/// Cheap feasible test functions for the lower bound.
double best_single_f(const DiscreteMeasure& mu, const RealArray& s) {
  const Index n = s.size();
  double best = 0.0;
  auto consider = [&](const RealArray& f) { best = std::max(best, std::abs((f * s).sum())); };
  RealArray f(n);
  for (int a = 0; a < mu.dim(); ++a) {
    const double period = mu.period.empty() ? 0.0 : mu.period[a];
    double mpos = 0.0, mneg = 0.0, wpos = 0.0, wneg = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (s[i] > 0) {
        mpos += s[i] * mu.points(i, a);
        wpos += s[i];
      } else {
        mneg -= s[i] * mu.points(i, a);
        wneg -= s[i];
      }
    }
    const double cpos = wpos > 0 ? mpos / wpos : 0.0, cneg = wneg > 0 ? mneg / wneg : 0.0;
    for (double c : {cpos, cneg, 0.5 * (cpos + cneg)}) {
      for (Index i = 0; i < n; ++i) {
        const double x = mu.points(i, a) - c;
        const double v = period > 0 ? period / (2 * M_PI) * std::sin(2 * M_PI * x / period) : x;
        f[i] = std::clamp(v, -1.0, 1.0);
      }
      consider(f);
    }
  }
  if (n <= 2000) {
    // Half the difference of distances to the two signed supports.
    for (Index i = 0; i < n; ++i) {
      double dp = 4.0, dn = 4.0;
      for (Index j = 0; j < n; ++j) {
        if (s[j] > 0) dp = std::min(dp, mu.distance(i, j));
        if (s[j] < 0) dn = std::min(dn, mu.distance(i, j));
      }
      f[i] = std::clamp(0.5 * (dn - dp), -1.0, 1.0);
    }
    consider(f);
  }
  return best;
}

/// Coupling cost of the greedy (north-west corner) plan in first-axis order.
double greedy_coupling_cost(const DiscreteMeasure& mu, const RealArray& s) {
  const Index n = s.size();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return mu.points(a, 0) < mu.points(b, 0); });
  std::vector<std::pair<Index, double>> pos, neg;
  for (Index i : order) {
    if (s[i] > 0) pos.emplace_back(i, s[i]);
    if (s[i] < 0) neg.emplace_back(i, -s[i]);
  }
  double cost = 0.0;
  std::size_t p = 0, q = 0;
  while (p < pos.size() && q < neg.size()) {
    const double m = std::min(pos[p].second, neg[q].second);
    cost += m * std::min(mu.distance(pos[p].first, neg[q].first), 2.0);
    pos[p].second -= m;
    neg[q].second -= m;
    if (pos[p].second <= 0) ++p;
    if (neg[q].second <= 0) ++q;
  }
  // Leftover imbalance (only from round-off) costs at most 1 per unit.
  for (; p < pos.size(); ++p) cost += pos[p].second;
  for (; q < neg.size(); ++q) cost += neg[q].second;
  return cost;
}

D0Result bounds_result(const DiscreteMeasure& mu, const RealArray& s) {
  D0Result r;
  r.label = "d0_bounds";
  r.lower = best_single_f(mu, s);
  r.upper = std::min(s.abs().sum(), greedy_coupling_cost(mu, s));
  r.upper = std::max(r.upper, r.lower);
  r.value = 0.5 * (r.lower + r.upper);
  return r;
}

DiscreteMeasure unchecked_measure(Eigen::MatrixXd pts, RealArray w, std::vector<double> period) {
  DiscreteMeasure m;
  m.points = std::move(pts);
  m.weights = std::move(w);
  m.period = std::move(period);
  return m;
}

Eigen::MatrixXd grid_points(const Grid& g) {
  Eigen::MatrixXd pts(g.size(), g.dim());
  const auto coords = g.coordinates();
  for (int a = 0; a < g.dim(); ++a) pts.col(a) = coords[a].matrix();
  return pts;
}

std::vector<double> grid_period(const Grid& g) {
  std::vector<double> p(g.dim());
  for (int a = 0; a < g.dim(); ++a) p[a] = 2.0 * g.half_extent(a);
  return p;
}

RealArray cell_masses(const Field& f) {
  RealArray w = f.values.max(0.0) * f.grid.cell_volume();
  const double total = w.sum();
  if (!(total > 0.0)) throw ContractViolation("d0: field has no positive mass");
  return w / total;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(Eigen::MatrixXd pts, RealArray w, std::vector<double> per)
    : points(std::move(pts)), weights(std::move(w)), period(std::move(per)) {
  if (points.rows() != weights.size()) throw ContractViolation("DiscreteMeasure: points/weights size mismatch");
  if (!period.empty() && static_cast<Index>(period.size()) != points.cols())
    throw ContractViolation("DiscreteMeasure: period needs one entry per coordinate");
  if (weights.size() == 0) throw ContractViolation("DiscreteMeasure: empty support");
  if ((weights < 0.0).any()) throw ContractViolation("DiscreteMeasure: negative weight");
  if (std::abs(weights.sum() - 1.0) > 1e-10) throw ContractViolation("DiscreteMeasure: weights must sum to 1");
}

double DiscreteMeasure::distance(Index i, Index j) const {
  double acc = 0.0;
  for (Index a = 0; a < points.cols(); ++a) {
    const double d = wrap_delta(points(i, a) - points(j, a), period.empty() ? 0.0 : period[a]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

DiscreteMeasure DiscreteMeasure::from_field(const Field& f) {
  return DiscreteMeasure(grid_points(f.grid), cell_masses(f), grid_period(f.grid));
}

D0Method parse_d0_method(const std::string& name) {
  if (name == "exact-lp" || name == "exact_lp") return D0Method::exact_lp;
  if (name == "grid-lp" || name == "grid_lp") return D0Method::grid_lp;
  if (name == "bounds") return D0Method::bounds;
  throw ContractViolation("unknown d0 method '" + name + "'");
}

std::string to_string(D0Method m) {
  switch (m) {
    case D0Method::exact_lp: return "exact-lp";
    case D0Method::grid_lp: return "grid-lp";
    case D0Method::bounds: return "bounds";
  }
  return "?";
}

D0Result d0_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, D0Method method) {
  const RealArray s = difference(mu, nu);
  if (method == D0Method::bounds) return bounds_result(mu, s);
  if (method == D0Method::grid_lp && mu.dim() > 1)
    throw ContractViolation("d0: grid-lp needs grid measures (use the Field overload)");
  const FlowOutcome out = exact_flow(mu, s);
  D0Result r;
  r.label = "d0";
  r.value = r.lower = r.upper = std::min(out.value, 2.0);
  r.certificate = out.f;
  return r;
}

D0Result d0_distance(const Field& a, const Field& b, D0Method method, Index max_cells) {
  require_same_grid(a.grid, b.grid, "d0_distance");
  const Grid& g = a.grid;
  const RealArray s = cell_masses(a) - cell_masses(b);
  if (method == D0Method::bounds)
    return bounds_result(unchecked_measure(grid_points(g), cell_masses(a), grid_period(g)), s);

  if (g.dim() == 1 || method == D0Method::grid_lp) {
    // Axis-neighbour graph on the grid torus; exact in 1D, l1-Lipschitz otherwise.
    std::vector<std::tuple<int, int, double>> edges;
    for (Index i = 0; i < g.size(); ++i) {
      auto idx = g.unflatten(i);
      for (int ax = 0; ax < g.dim(); ++ax) {
        if (g.points(ax) < 2) continue;
        auto nb = idx;
        nb[ax] = (nb[ax] + 1) % g.points(ax);
        if (g.points(ax) == 2 && idx[ax] == 1) continue;
        edges.emplace_back(static_cast<int>(i), static_cast<int>(g.flatten(nb)), g.spacing(ax));
      }
    }
    const FlowOutcome out = ground_flow(s, edges);
    D0Result r;
    r.label = g.dim() == 1 ? "d0" : "d0_l1";
    r.value = r.lower = r.upper = std::min(out.value, 2.0);
    r.certificate = out.f;
    return r;
  }

  // Exact LP in d >= 2: block-sum pooling to at most max_cells cells.
  const int d = g.dim();
  std::vector<int> blocks(d);
  Index total = 1;
  const int per_axis = std::max(1, static_cast<int>(std::floor(std::pow(static_cast<double>(max_cells), 1.0 / d) + 1e-9)));
  for (int ax = 0; ax < d; ++ax) {
    blocks[ax] = std::min(g.points(ax), per_axis);
    total *= blocks[ax];
  }
  Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(total, d);
  RealArray sp = RealArray::Zero(total), count = RealArray::Zero(total);
  double diameter2 = 0.0;
  for (int ax = 0; ax < d; ++ax) {
    const int width = (g.points(ax) + blocks[ax] - 1) / blocks[ax];
    if (blocks[ax] < g.points(ax)) diameter2 += std::pow((width - 1) * g.spacing(ax), 2);
  }
  for (Index i = 0; i < g.size(); ++i) {
    const auto idx = g.unflatten(i);
    Index flat = 0;
    for (int ax = 0; ax < d; ++ax) flat = flat * blocks[ax] + static_cast<Index>(idx[ax]) * blocks[ax] / g.points(ax);
    sp[flat] += s[i];
    count[flat] += 1.0;
    for (int ax = 0; ax < d; ++ax) pts(flat, ax) += g.coordinate(ax, idx[ax]);
  }
  for (Index k = 0; k < total; ++k) pts.row(k) /= count[k];
  const DiscreteMeasure pooled = unchecked_measure(pts, RealArray::Zero(total), grid_period(g));
  const FlowOutcome out = exact_flow(pooled, sp);
  D0Result r;
  r.label = "d0";
  r.value = std::min(out.value, 2.0);
  r.pooling_uncertainty = std::sqrt(diameter2);
  r.lower = std::max(0.0, r.value - r.pooling_uncertainty);
  r.upper = std::min(2.0, r.value + r.pooling_uncertainty);
  r.certificate = out.f;
  return r;
}

double evaluate_test_function(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const RealArray& f) {
  const RealArray s = difference(mu, nu);
  if (f.size() != s.size()) throw ContractViolation("test function size mismatch");
  for (Index i = 0; i < f.size(); ++i) {
    if (std::abs(f[i]) > 1.0 + 1e-12) throw ContractViolation("test function exceeds 1");
    for (Index j = i + 1; j < f.size(); ++j)
      if (std::abs(f[i] - f[j]) > mu.distance(i, j) + 1e-12) throw ContractViolation("test function not 1-Lipschitz");
  }
  return (f * s).sum();
}

double d0_brute_oracle(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const RealArray s = difference(mu, nu);
  const int n = static_cast<int>(s.size());
  if (n > 6) throw ContractViolation("d0_brute_oracle: at most 6 support points");
  std::vector<std::vector<double>> dist(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dist[i][j] = mu.distance(i, j);

  // Each node picks a parent (n = the bound constraint) and a sign; acyclic
  // choices are exactly the bases of the vertex system.
  const int choices = 2 * n;
  std::vector<int> pick(n, 0);
  std::vector<double> f(n);
  std::vector<int> state(n);
  double best = 0.0;
  std::function<double(int)> resolve = [&](int i) -> double {
    if (state[i] == 2) return f[i];
    if (state[i] == 1) return std::numeric_limits<double>::quiet_NaN();  // cycle
    state[i] = 1;
    const int parent = pick[i] / 2;
    const double sign = pick[i] % 2 ? -1.0 : 1.0;
    double v;
    if (parent == i)
      v = sign;  // own bound f_i = +-1
    else
      v = resolve(parent) + sign * dist[i][parent];
    f[i] = v;
    state[i] = 2;
    return v;
  };
  while (true) {
    std::fill(state.begin(), state.end(), 0);
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) ok = std::isfinite(resolve(i));
    if (ok) {
      for (int i = 0; i < n && ok; ++i) {
        if (std::abs(f[i]) > 1.0 + 1e-12) ok = false;
        for (int j = 0; j < n && ok; ++j)
          if (f[i] - f[j] > dist[i][j] + 1e-12) ok = false;
      }
      if (ok) {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += f[i] * s[i];
        best = std::max(best, v);
      }
    }
    int k = 0;
    while (k < n && ++pick[k] == choices) pick[k++] = 0;
    if (k == n) break;
  }
  return best;
}

TrajectorySup d0_trajectory_sup(const std::vector<Field>& a, const std::vector<Field>& b, D0Method method) {
  if (a.size() != b.size() || a.empty()) throw ContractViolation("d0_trajectory_sup: misaligned trajectories");
  TrajectorySup out;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].time && b[k].time && std::abs(*a[k].time - *b[k].time) > 1e-12)
      throw ContractViolation("d0_trajectory_sup: time nodes differ");
    const D0Result r = d0_distance(a[k], b[k], method);
    if (k == 0 || r.value > out.value) {
      out.value = r.value;
      out.index = static_cast<Index>(k);
      out.time = a[k].time.value_or(static_cast<double>(k));
    }
    out.pooling_uncertainty = std::max(out.pooling_uncertainty, r.pooling_uncertainty);
  }
  return out;
}

}  // namespace lmfg
